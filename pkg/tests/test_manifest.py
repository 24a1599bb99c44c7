from __future__ import annotations

import numpy as np
import pytest

from pstfault.fault_model import ALL_LABELS, WaveformRecord, generate_dataset, make_record
from pstfault.fault_model import Loading, ScenarioParams, Shift, Tap
from pstfault.features import (FeatureDescriptor, FeatureManifest, compact_manifest,
                               default_manifest, extract_all, extract_matrix, extract_signal,
                               read_features_csv, write_features_csv)
from pstfault.features import manifest as mf


def record(label_index=0):
    return make_record(ALL_LABELS[label_index],
                       ScenarioParams(30, 50, Tap.FULL, Shift.FORWARD, Loading.LOADED))


SMALL = FeatureManifest([mf.statistic("mean"), mf.apen(), mf.sampen(), mf.fft_coeff(3, "abs"),
                         mf.cwt_coeff(5, 100)])


class TestManifest:
    def test_default_has_at_least_700_per_phase(self):
        m = default_manifest()
        assert len(m) >= 700
        assert len(m.column_names()) == 3 * len(m)

    def test_names_are_unique_and_phase_prefixed(self):
        names = default_manifest().column_names()
        assert len(set(names)) == len(names)
        assert names[0].startswith("a__") and names[-1].startswith("c__")

    def test_duplicate_names_rejected(self):
        with pytest.raises(ValueError):
            FeatureManifest([mf.apen(), mf.apen()])

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            FeatureManifest([])

    def test_unknown_extractor(self):
        with pytest.raises(ValueError):
            FeatureDescriptor("x", "wavelet-packet", {})

    def test_json_roundtrip(self, tmp_path):
        m = default_manifest()
        path = tmp_path / "m.json"
        m.save(path)
        back = FeatureManifest.load(path)
        assert back == m and back.fingerprint() == m.fingerprint()

    def test_fingerprint_distinguishes(self):
        assert default_manifest().fingerprint() != compact_manifest().fingerprint()


class TestExtraction:
    def test_vector_length_is_three_times_manifest(self):
        vec = extract_all(record(), SMALL)
        assert vec.values.shape == (15,)
        assert vec.label == ALL_LABELS[0]

    def test_default_length(self):
        vec = extract_all(record(3), default_manifest())
        assert vec.values.size >= 2100 and np.all(np.isfinite(vec.values))

    def test_identical_records_identical_vectors(self):
        a = extract_all(record(5), default_manifest())
        b = extract_all(record(5), default_manifest())
        assert np.array_equal(a.values, b.values)

    def test_phase_major_order(self):
        rec = record(0)
        vec = extract_all(rec, SMALL)
        for p in range(3):
            values, _ = extract_signal(rec.channels[p], SMALL)
            assert np.array_equal(vec.values[5 * p:5 * (p + 1)], values)

    def test_values_match_direct_extractors(self):
        from pstfault.features import approximate_entropy, fft_coefficients, sample_entropy
        from pstfault.features.spectral import cwt_transform
        x = record(2).channels[0]
        values, _ = extract_signal(x, SMALL)
        r = 0.2 * x.std()
        assert values[0] == pytest.approx(x.mean())
        assert values[1] == approximate_entropy(x, 2, r)
        assert values[2] == sample_entropy(x, 2, r)
        assert values[3] == fft_coefficients(x, 4)["abs"][3]
        assert values[4] == cwt_transform(x, 5)[100]

    def test_constant_signal_replaces_non_finite(self):
        m = FeatureManifest([mf.statistic("skewness"), mf.statistic("kurtosis"), mf.apen()])
        values, quality = extract_signal(np.zeros(700), m)
        assert np.array_equal(values, [0.0, 0.0, 0.0])
        assert quality.non_finite_replaced == 2

    def test_sampen_undefined_counted(self):
        m = FeatureManifest([mf.sampen(2, 1e-6)])
        _, quality = extract_signal(np.random.default_rng(0).normal(size=100), m)
        assert quality.sampen_undefined == 1

    def test_matrix_independent_of_jobs(self):
        recs = generate_dataset(360, labels=ALL_LABELS[:2])[:12]
        m = compact_manifest()
        a, labels, qa = extract_matrix(recs, m, jobs=1, chunk_size=5)
        b, _, qb = extract_matrix(recs, m, jobs=2, chunk_size=5)
        assert np.array_equal(a, b) and labels == [r.label for r in recs]
        assert qa.to_dict() == qb.to_dict()

    def test_csv_roundtrip(self, tmp_path):
        recs = generate_dataset(360, labels=ALL_LABELS[:2])[:6]
        m = compact_manifest()
        X, labels, _ = extract_matrix(recs, m)
        path = tmp_path / "f.csv"
        write_features_csv(path, X, labels, m.column_names())
        back, back_labels, cols = read_features_csv(path)
        assert np.array_equal(back, X) and back_labels == labels and cols == m.column_names()

    def test_corrupt_csv(self, tmp_path):
        path = tmp_path / "f.csv"
        path.write_text("label,a__x\nsp_a-g,1.0\nsp_a-g,oops\n")
        with pytest.raises(ValueError, match=":3:"):
            read_features_csv(path)
        path.write_text("label,a__x\nsp_a-g,1.0,2.0\n")
        with pytest.raises(ValueError):
            read_features_csv(path)
        path.write_text("wrong,a__x\n")
        with pytest.raises(ValueError):
            read_features_csv(path)
