"""Acceptance gate for the exporter, mirroring the engine's PASS/FAIL style."""

import numpy as np
import pytest

from uqexport import CorruptionSpec, apply_corruptions, export_predictions


def _report(name: str, ok: bool) -> None:
    print(f"ACCEPT {name}: {'PASS' if ok else 'FAIL'}")
    assert ok


def test_exporter_contract(tmp_path):
    uqeval_formats = pytest.importorskip("uqeval.formats")
    from uqeval.decomposition import epistemic_uncertainty

    def frozen_hook(data, pass_index):
        return np.random.default_rng(0).uniform(size=(data.shape[0], 4))

    path = tmp_path / "p.uqb1"
    export_predictions(frozen_hook, np.zeros((10, 2)), 3, path)
    preds = uqeval_formats.read_uqb1(path)
    ok = bool(np.all(np.abs(epistemic_uncertainty(preds).values) < 1e-9))

    images = np.random.default_rng(1).integers(0, 256, (3, 24, 24), dtype=np.uint8)
    spec = CorruptionSpec(severity=0.8, seed=4)
    a, _ = apply_corruptions(images, spec)
    b, _ = apply_corruptions(images, spec)
    ok &= a.tobytes() == b.tobytes()
    clean, _ = apply_corruptions(images, CorruptionSpec(severity=0.0))
    ok &= clean.tobytes() == images.tobytes()
    _report("exporter-contract", ok)
