"""Acceptance suite, run on synthetic data.

Run alone with ``pytest tests/test_acceptance.py -v``; a summary line per
criterion is printed at the end of the session.
"""

import math
import time

import numpy as np
import pytest

from gesture_lstm.cli import main
from gesture_lstm.dataset import load_csv, save_csv, write_dataset
from gesture_lstm.decoder import LabelPath, brute_force_decode, map_decode
from gesture_lstm.evaluation import evaluate, render_sweep
from gesture_lstm.lstm import (
    LstmParams,
    OutputParams,
    TrainConfig,
    forward_sequence,
    gradient_check,
    param_dict,
    random_instance,
    sequence_loss,
    train,
)
from gesture_lstm.modelfile import ModelFile, load_model, save_model
from gesture_lstm.numerics import softmax
from gesture_lstm.pipeline import recognize
from gesture_lstm.synth import GenConfig, SessionSpec, gen_dataset

pytestmark = pytest.mark.slow

FOUR_GESTURE_SESSION = (4, 2, 5, 6)
PER_CLASS = 200
TEST_PER_CLASS = 50
N_TEST_SESSIONS = 200
TRAIN = dict(lr=5e-3, epochs=12, batch_size=16, seed=0, num_classes=6)


@pytest.fixture(scope="module")
def data():
    spec = SessionSpec(n_train=300, n_test=N_TEST_SESSIONS, min_len=2, max_len=4, fixed=(FOUR_GESTURE_SESSION,))
    train_set, test_set = gen_dataset(GenConfig(seed=2018), PER_CLASS, spec, TEST_PER_CLASS)
    singles = [s for s in test_set if len(s.truth) == 1]
    sessions = [s for s in test_set if len(s.truth) > 1]
    return train_set, singles, sessions


@pytest.fixture(scope="module")
def models(data):
    train_set = data[0]
    out = {}
    for H in (16, 32, 64):
        t0 = time.perf_counter()
        res = train(train_set, TrainConfig(hidden_dim=H, **TRAIN))
        out[H] = (res, time.perf_counter() - t0)
    return out


def single_report(res, singles):
    return evaluate(res.params, res.output, singles, [s.truth for s in singles])


def test_1_gradient_correctness(criterion):
    t0 = time.perf_counter()
    errors = [gradient_check(*random_instance(seed, N=3, H=4, Q=3, T=5), step=1e-5).max_rel_error
              for seed in range(10)]
    elapsed = time.perf_counter() - t0
    criterion("1 gradient check", max(errors) < 1e-4 and elapsed < 10,
              f"max rel err {max(errors):.2e} over 10 instances, {elapsed:.1f}s")


def test_2_decoder_optimality(criterion):
    rng = np.random.default_rng(42)
    t0 = time.perf_counter()
    checked = mismatches = 0
    while checked < 1000:
        T = int(rng.integers(5, 41))
        A = LabelPath(rng.integers(1, 7, size=T), 6)
        k = int(rng.integers(1, 4))
        if k > A.distinct:
            continue
        m, b = map_decode(A, k), brute_force_decode(A, k)
        prod_m = math.prod(m.spotting.count(r) for r in m.R)
        prod_b = math.prod(b.spotting.count(r) for r in b.R)
        mismatches += prod_m != prod_b
        checked += 1
    elapsed = time.perf_counter() - t0
    criterion("2 decoder optimality", mismatches == 0 and elapsed < 5,
              f"{checked} paths, {mismatches} mismatches, {elapsed:.2f}s")


def test_3_worked_mapping(criterion):
    rec = map_decode(LabelPath([2, 2, 2, 2, 3, 3, 3, 3, 1, 1, 1, 6], 6), 3)
    criterion("3 worked path mapping", rec.R == (2, 3, 1), f"R = {rec.R}")


def test_4_single_gestures(models, data, criterion):
    res, train_time = models[32]
    t0 = time.perf_counter()
    rep = single_report(res, data[1])
    elapsed = train_time + time.perf_counter() - t0
    criterion("4 single-gesture accuracy (H=32)", rep.accuracy >= 0.95 and elapsed < 600,
              f"{100 * rep.accuracy:.2f}% on {rep.confusion.total} held-out gestures, "
              f"train+eval {elapsed:.0f}s")


def test_5_continuous_spotting(models, data, criterion):
    res, _ = models[32]
    sessions = data[2]
    random_sessions = sessions[:N_TEST_SESSIONS]
    assert len(random_sessions) == 200 and sessions[-1].truth == FOUR_GESTURE_SESSION
    rep = evaluate(res.params, res.output, random_sessions, [s.truth for s in random_sessions])
    four = recognize(res.params, res.output, sessions[-1].x, 4).R
    criterion("5 continuous spotting", rep.session_exact_match >= 0.90 and four == FOUR_GESTURE_SESSION,
              f"exact match {100 * rep.session_exact_match:.2f}% on 200 sessions; "
              f"(4,2,5,6) -> {four}")


def test_6_hidden_size_sweep(models, data, criterion):
    singles = data[1]
    reports = [(H, single_report(models[H][0], singles)) for H in (16, 32, 64)]
    text = render_sweep(reports)
    print(text)
    accs = {H: rep.accuracy for H, rep in reports}
    shaped = text.splitlines()[0] == "Accuracy by hidden dimension" and len(text.splitlines()) == 5
    criterion("6 hidden-size sweep", shaped and min(accs.values()) >= 0.90,
              ", ".join(f"H={H}: {100 * a:.2f}%" for H, a in accs.items()))


def test_7_ablation_harness(models, data, tmp_path, capsys, criterion):
    res, _ = models[32]
    singles, sessions = data[1], data[2]
    write_dataset(tmp_path / "data", [], singles[::5] + sessions[:10])
    save_model(ModelFile(res.params, res.output, {"hidden_dim": 32}), tmp_path / "m.json")
    code = main(["eval", "--data-dir", str(tmp_path / "data"), "--model", str(tmp_path / "m.json"),
                 "--mask", "accel", "--mask", "gyro", "--mask", "both"])
    out = capsys.readouterr().out
    table = out.split("Hit rate (%) by sensor set\n")[-1].splitlines()[:4]
    rows = [ln.split() for ln in table[1:]]
    ok = (code == 0 and [r[0] for r in rows] == ["accelerometer", "gyroscope", "both"]
          and all(len(r) == 7 for r in rows) and table[0].split() == [f"H_{i}" for i in range(1, 7)])
    criterion("7 ablation harness", ok, "3 sensor rows x 6 hit rates emitted")


def test_8_normalization_and_determinism(data, tmp_path, criterion):
    rng = np.random.default_rng(0)
    sums = softmax(rng.uniform(-50, 50, size=(1000, 6))).sum(axis=1)
    softmax_ok = np.all(np.abs(sums - 1) <= 1e-12)

    H = 8
    zp = LstmParams(np.zeros((4 * H, 6)), np.zeros((4 * H, H)), np.zeros(4 * H))
    zo = OutputParams(np.zeros((6, H)), np.zeros(6))
    seq = data[2][0]
    loss = sequence_loss(forward_sequence(zp, zo, seq.x), seq.labels)
    loss_ok = abs(loss - math.log(6)) <= 1e-12

    subset = data[0][::40]
    cfg = TrainConfig(hidden_dim=8, epochs=2, lr=5e-3, batch_size=4, seed=5)
    a, b = train(subset, cfg), train(subset, cfg)
    da, db = param_dict(a.params, a.output), param_dict(b.params, b.output)
    train_ok = all(np.array_equal(da[k], db[k]) for k in da)

    save_model(ModelFile(a.params, a.output, cfg.to_dict(), 5), tmp_path / "a.json")
    save_model(load_model(tmp_path / "a.json"), tmp_path / "b.json")
    model_ok = (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()

    save_csv(seq, tmp_path / "s.csv")
    back = load_csv(tmp_path / "s.csv")
    csv_ok = np.allclose(back.x, seq.x, rtol=1e-8, atol=1e-8) and np.array_equal(back.labels, seq.labels)

    checks = dict(softmax=softmax_ok, zero_loss=loss_ok, train=train_ok, model=model_ok, csv=csv_ok)
    criterion("8 normalization and determinism", all(checks.values()),
              ", ".join(f"{k}={'ok' if v else 'FAIL'}" for k, v in checks.items()))
