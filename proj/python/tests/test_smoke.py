import json
import os
import subprocess
from pathlib import Path

import pytest

import linggen

LINGGEN_BIN = os.environ.get("LINGGEN_BIN")


def test_attribute_schema():
    ids = linggen.attribute_ids()
    assert len(ids) == 16
    assert "n_words" in ids


def test_extract_worked_example():
    v = linggen.extract("The cat sat on the mat.")
    assert v["n_words"] == 6
    assert v["n_sentences"] == 1


def test_empty_document_raises():
    with pytest.raises(linggen.LinggenError, match="EmptyDocument"):
        linggen.extract(" ... ")


def test_masking_distribution():
    b, mass, _ = linggen.calibrate_shape(0.3, 0.6)
    assert 2.69 <= b <= 2.72
    assert 0.6 <= mass <= 0.60001
    assert linggen.pmask_cdf(linggen.pmask_quantile(0.4, 3.0), 3.0) == pytest.approx(0.4)
    rates = linggen.sample_rates(20000, 3.0, seed=5)
    assert rates == linggen.sample_rates(20000, 3.0, seed=5)
    assert all(0.0 <= r <= 1.0 for r in rates)
    share = sum(r <= 0.3 for r in rates) / len(rates)
    assert abs(share - linggen.pmask_cdf(0.3, 3.0)) < 0.02
    assert linggen.masked_count(0.35, 10) == 4


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    if not LINGGEN_BIN:
        pytest.skip("LINGGEN_BIN not set")
    d = tmp_path_factory.mktemp("run")
    run = lambda *a: subprocess.run([LINGGEN_BIN, *a], check=True, capture_output=True)
    run("synth", "--n-docs", "400", "--out", str(d / "raw"))
    run("ingest", "--in", str(d / "raw" / "corpus.jsonl"), "--out", str(d / "prep"))
    small = ["--d-model", "16", "--n-layers", "1", "--ffn-size", "32", "--batch-size", "8", "--eval-every", "10"]
    run("train", "--corpus", str(d / "prep"), "--steps", "20", *small, "--out", str(d / "lm.bin"))
    run("train-disc", "--corpus", str(d / "prep"), "--steps", "20", *small, "--out", str(d / "disc.bin"))
    return d


def test_generation_is_seeded(trained):
    lm = linggen.LanguageModel(trained / "lm.bin")
    assert lm.strategy == "pmask"
    a = lm.generate({"n_words": 10}, n=3, seed=4)
    assert a == lm.generate({"n_words": 10}, n=3, seed=4)
    assert len(a) == 3
    with pytest.raises(linggen.LinggenError, match="UnknownAttributeId"):
        lm.generate({"bogus": 1.0})


def test_discriminator_predicts_every_attribute(trained):
    disc = linggen.Discriminator(trained / "disc.bin")
    p = disc.predict("the cat sat on the mat.")
    assert set(p) == set(linggen.attribute_ids())
    with pytest.raises(linggen.LinggenError):
        linggen.LanguageModel(trained / "disc.bin")
