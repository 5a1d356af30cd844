"""Release gate: eleven checks covering math, metrics, data handling, and
end-to-end behavior on synthetic data. Each test prints one PASS/FAIL line
on the terminal regardless of capture settings."""
import json
import time
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest

from finhyp.distance import levenshtein
from finhyp.embeddings import EmbeddingStore
from finhyp.evaluation import accuracy, macro_f1, mean_rank, stratified_kfold
from finhyp.features import MinMaxScaler
from finhyp.model import loss_and_grad, loss_value, train
from finhyp.oov import OOVStrategy, resolve_levenshtein
from finhyp.pipeline import PipelineConfig, apply_preset, run_cv
from finhyp.synth import CLASS_PROFILE, generate, write_dataset


def _report(capsys, num, desc, ok):
    with capsys.disabled():
        print(f"[acceptance] criterion {num:2d}: {'PASS' if ok else 'FAIL'} - {desc}")


# ------------------------------------------------------------------ 1: gradient


def _finite_diff(W, b, X, y, c, eps=1e-5):
    gw = np.zeros_like(W)
    gb = np.zeros_like(b)
    for idx in np.ndindex(W.shape):
        Wp, Wm = W.copy(), W.copy()
        Wp[idx] += eps
        Wm[idx] -= eps
        gw[idx] = (loss_value(Wp, b, X, y, c) - loss_value(Wm, b, X, y, c)) / (2 * eps)
    for i in range(b.shape[0]):
        bp, bm = b.copy(), b.copy()
        bp[i] += eps
        bm[i] -= eps
        gb[i] = (loss_value(W, bp, X, y, c) - loss_value(W, bm, X, y, c)) / (2 * eps)
    return gw, gb


def test_criterion_01_gradient_matches_finite_differences(capsys):
    ok = False
    try:
        start = time.perf_counter()
        rng = np.random.default_rng(101)
        worst = 0.0
        for _ in range(25):
            n = int(rng.integers(2, 21))
            d = int(rng.integers(1, 11))
            k = int(rng.integers(2, 6))
            X = rng.normal(size=(n, d))
            y = rng.integers(0, k, size=n)
            W = rng.normal(scale=0.5, size=(k, d))
            b = rng.normal(scale=0.5, size=k)
            c = float(rng.choice([0.01, 0.1, 1.0, 10.0]))
            _, gw, gb = loss_and_grad(W, b, X, y, c)
            fw, fb = _finite_diff(W, b, X, y, c)
            for analytic, numeric in ((gw, fw), (gb, fb)):
                scale = np.maximum(1.0, np.abs(numeric))
                worst = max(worst, float(np.max(np.abs(analytic - numeric) / scale)))
        elapsed = time.perf_counter() - start
        ok = worst <= 1e-5 and elapsed < 5.0
    finally:
        _report(capsys, 1, "analytic gradient vs central differences, 25 instances", ok)
    assert worst <= 1e-5
    assert elapsed < 5.0


# ------------------------------------------------------- 2: convex optimum


def _oracle_softmax_grads(W, b, X, y, c):
    n = X.shape[0]
    Z = X @ W.T + b
    Z = Z - Z.max(axis=1, keepdims=True)
    P = np.exp(Z)
    P /= P.sum(axis=1, keepdims=True)
    P[np.arange(n), y] -= 1.0
    return P.T @ X + W / c, P.sum(axis=0)


def _oracle_loss(W, b, X, y, c):
    Z = X @ W.T + b
    Z = Z - Z.max(axis=1, keepdims=True)
    logp = Z - np.log(np.exp(Z).sum(axis=1, keepdims=True))
    nll = -logp[np.arange(len(y)), y].sum()
    return float(nll + (W * W).sum() / (2.0 * c))


def test_criterion_02_trained_loss_reaches_convex_optimum(capsys):
    ok = False
    try:
        start = time.perf_counter()
        rng = np.random.default_rng(202)
        X = rng.normal(size=(20, 4))
        y = rng.integers(0, 3, size=20)
        c = 1.0

        # step 1/L with L an upper bound on the gradient's Lipschitz constant
        L = 0.5 * ((X * X).sum() + len(X)) + 1.0 / c
        step = 1.0 / L
        W = np.zeros((3, 4))
        b = np.zeros(3)
        for _ in range(150_000):
            gW, gb = _oracle_softmax_grads(W, b, X, y, c)
            W -= step * gW
            b -= step * gb
        oracle = _oracle_loss(W, b, X, y, c)

        model = train(X, y, ("a", "b", "c"), c)
        trained = _oracle_loss(model.weights, model.bias, X, y, c)
        elapsed = time.perf_counter() - start
        gap = abs(trained - oracle)
        ok = gap <= 1e-6 and elapsed < 10.0
    finally:
        _report(capsys, 2, "trained loss within 1e-6 of slow-descent optimum", ok)
    assert gap <= 1e-6
    assert elapsed < 10.0


# ------------------------------------------------------------- 3: metric oracles


def _oracle_rank(pred, gold):
    for i in range(min(3, len(pred))):
        if pred[i] == gold:
            return i + 1
    return 4


def test_criterion_03_metrics_match_counting_oracles(capsys):
    ok = False
    try:
        rng = np.random.default_rng(303)
        exact = True
        worst_f1_gap = 0.0
        for _ in range(100):
            n = int(rng.integers(1, 51))
            k = int(rng.integers(2, 6))
            gold = rng.integers(0, k, size=n).tolist()
            preds = [rng.permutation(k)[:3].tolist() for _ in range(n)]

            acc_oracle = Fraction(sum(p[0] == g for p, g in zip(preds, gold)), n)
            mr_oracle = Fraction(sum(_oracle_rank(p, g) for p, g in zip(preds, gold)), n)
            exact &= accuracy(preds, gold) == float(acc_oracle)
            mr = mean_rank(preds, gold)
            exact &= mr == float(mr_oracle)
            exact &= 1.0 <= mr <= 4.0

            tp, fp, fn = Counter(), Counter(), Counter()
            for p, g in zip(preds, gold):
                if p[0] == g:
                    tp[g] += 1
                else:
                    fp[p[0]] += 1
                    fn[g] += 1
            f1_oracle = sum(
                Fraction(2 * tp[c], 2 * tp[c] + fp[c] + fn[c])
                for c in range(k)
                if 2 * tp[c] + fp[c] + fn[c]
            ) / k
            macro, _ = macro_f1(preds, gold, k)
            worst_f1_gap = max(worst_f1_gap, abs(macro - float(f1_oracle)))

        mixture = mean_rank([[0, 8, 8], [8, 0, 8], [8, 8, 8]], [0, 0, 0])
        exact &= mixture == 7 / 3
        ok = exact and worst_f1_gap <= 1e-12
    finally:
        _report(capsys, 3, "accuracy/mean-rank exact, macro F1 within 1e-12", ok)
    assert exact
    assert worst_f1_gap <= 1e-12


# --------------------------------------------------------- 4: edit distance


def _reference_levenshtein(a, b):
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(
                min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb))
            )
        prev = cur
    return prev[len(b)]


def test_criterion_04_levenshtein_matches_reference(capsys):
    ok = False
    try:
        rng = np.random.default_rng(404)
        alphabet = "abcdé中"
        mismatches = 0
        for _ in range(1000):
            a = "".join(rng.choice(list(alphabet), size=rng.integers(0, 13)))
            b = "".join(rng.choice(list(alphabet), size=rng.integers(0, 13)))
            if levenshtein(a, b) != _reference_levenshtein(a, b):
                mismatches += 1
        ok = mismatches == 0
    finally:
        _report(capsys, 4, "edit distance exact on 1000 random pairs", ok)
    assert mismatches == 0


# ----------------------------------------------------------- 5: OOV resolution


def _random_vocab(rng, max_words=200):
    n = int(rng.integers(1, max_words + 1))
    words = set()
    while len(words) < n:
        length = int(rng.integers(1, 10))
        words.add("".join(rng.choice(list("abcdef"), size=length)))
    return sorted(words)


def test_criterion_05_oov_identity_and_argmin(capsys):
    ok = False
    try:
        rng = np.random.default_rng(505)
        good = True
        for _ in range(100):
            vocab = _random_vocab(rng)
            store = EmbeddingStore(vocab, np.zeros((len(vocab), 1)))

            probe = vocab[int(rng.integers(0, len(vocab)))]
            good &= resolve_levenshtein(probe, store) == probe

            query = "".join(rng.choice(list("abcdefg"), size=rng.integers(1, 12)))
            resolved = resolve_levenshtein(query, store)
            brute = min(
                vocab, key=lambda w: (_reference_levenshtein(query, w), len(w), w)
            )
            good &= resolved == brute

        fixture = EmbeddingStore(["asia", "corporate", "bond"], np.zeros((3, 1)))
        good &= resolve_levenshtein("asiacorporate", fixture) == "corporate"

        strategy = OOVStrategy("levenshtein")
        good &= strategy.resolve("asiacorporate", fixture) == "corporate"
        ok = good
    finally:
        _report(capsys, 5, "in-vocab identity, exhaustive argmin, compound fixture", ok)
    assert good


# ----------------------------------------------------------- 6: stratification


def test_criterion_06_stratified_folds_balance_every_class(capsys):
    ok = False
    try:
        labels = [name for name, count in CLASS_PROFILE for _ in range(count)]
        assert len(labels) == 1050
        folds = stratified_kfold(labels, 5, seed=0)

        flat = np.concatenate(folds)
        partition = np.array_equal(np.sort(flat), np.arange(1050))

        balanced = True
        for name, _ in CLASS_PROFILE:
            per_fold = [sum(1 for i in f if labels[i] == name) for f in folds]
            balanced &= max(per_fold) - min(per_fold) <= 1
        ok = partition and balanced
    finally:
        _report(capsys, 6, "5 folds partition 1050 rows, per-class balance <= 1", ok)
    assert partition
    assert balanced


# ------------------------------------------------------------------ 7: scaler


def test_criterion_07_scaler_range_and_constant_columns(capsys):
    ok = False
    try:
        rng = np.random.default_rng(707)
        good = True
        for _ in range(20):
            n = int(rng.integers(2, 40))
            d = int(rng.integers(1, 12))
            matrix = rng.normal(scale=rng.uniform(0.1, 50), size=(n, d))
            const_cols = rng.integers(0, 2, size=d).astype(bool)
            matrix[:, const_cols] = rng.normal()
            out = MinMaxScaler().fit_transform(matrix)
            good &= bool(np.all(out >= -1.0) and np.all(out <= 1.0))
            good &= bool(np.all(out[:, const_cols] == 0.0))
        ok = good
    finally:
        _report(capsys, 7, "scaled training cells in [-1,1], constant columns 0", ok)
    assert good


# --------------------------------------------------------- 8-11: end to end


@pytest.fixture(scope="module")
def desk_run(tmp_path_factory):
    """Criterion 8 data and first CV run, shared with criterion 11."""
    root = tmp_path_factory.mktemp("desk")
    data_dir = root / "data"
    start = time.perf_counter()
    write_dataset(generate(17, 1050, seed=42, sigma=0.1), data_dir)

    def cv(out_name):
        cfg = apply_preset(
            PipelineConfig(
                embedding_path=str(data_dir / "embeddings.txt"),
                out_dir=str(root / out_name),
            ),
            "BL.HF.OOVm.D2",
        )
        return run_cv(cfg, data_dir / "terms.csv")

    first = cv("out1")
    elapsed = time.perf_counter() - start
    return {"data_dir": data_dir, "cv": cv, "first": first, "elapsed": elapsed}


def test_criterion_08_synthetic_end_to_end(capsys, desk_run):
    ok = False
    try:
        report = desk_run["first"].report
        elapsed = desk_run["elapsed"]
        ok = report.accuracy >= 0.95 and report.mean_rank <= 1.15 and elapsed < 60.0
    finally:
        _report(
            capsys,
            8,
            "synth 17x1050 CV accuracy >= 0.95, mean rank <= 1.15, under 60 s",
            ok,
        )
    assert report.accuracy >= 0.95
    assert report.mean_rank <= 1.15
    assert elapsed < 60.0


def test_criterion_09_handcrafted_features_exploit_planted_signal(capsys, tmp_path):
    ok = False
    try:
        # mean accuracy over 5 generator seeds, single-point C grid for speed
        scores = {"BL": [], "BL.HF": []}
        for seed in range(5):
            data_dir = tmp_path / f"seed{seed}"
            write_dataset(
                generate(17, 525, seed=seed, sigma=0.1, plant_substrings=True),
                data_dir,
            )
            for preset in scores:
                cfg = apply_preset(
                    PipelineConfig(
                        embedding_path=str(data_dir / "embeddings.txt"),
                        out_dir=str(data_dir / preset.replace(".", "_")),
                        c_grid=(1.0,),
                    ),
                    preset,
                )
                run = run_cv(cfg, data_dir / "terms.csv")
                scores[preset].append(run.report.accuracy)
        mean_bl = float(np.mean(scores["BL"]))
        mean_hf = float(np.mean(scores["BL.HF"]))
        ok = mean_hf >= mean_bl
    finally:
        _report(capsys, 9, "planted data: BL.HF accuracy >= BL accuracy over 5 seeds", ok)
    assert mean_hf >= mean_bl


def test_criterion_10_empty_dictionary_augmentation_is_identity(capsys, tmp_path):
    ok = False
    try:
        data_dir = tmp_path / "data"
        write_dataset(generate(5, 100, seed=3, sigma=0.1), data_dir)
        snapshot = tmp_path / "empty.json"
        snapshot.write_text("{}\n")

        def cv(preset, out_name, **extra):
            cfg = apply_preset(
                PipelineConfig(
                    embedding_path=str(data_dir / "embeddings.txt"),
                    out_dir=str(tmp_path / out_name),
                    c_grid=(1.0,),
                    **extra,
                ),
                preset,
            )
            return run_cv(cfg, data_dir / "terms.csv")

        plain = cv("BL.HF.OOVm.D2", "plain")
        augmented = cv(
            "BL.HF.OOVm.D2.+", "augmented", snapshot_path=str(snapshot)
        )
        identical = all(
            open(plain.paths[key], "rb").read()
            == open(augmented.paths[key], "rb").read()
            for key in plain.paths
        )
        ok = identical and augmented.coverage == 0.0
    finally:
        _report(capsys, 10, "empty-dictionary augmentation reports byte-identical", ok)
    assert identical
    assert augmented.coverage == 0.0


def test_criterion_11_reruns_are_byte_identical(capsys, desk_run):
    ok = False
    try:
        first = desk_run["first"]
        second = desk_run["cv"]("out2")
        identical = all(
            open(first.paths[key], "rb").read() == open(second.paths[key], "rb").read()
            for key in first.paths
        )
        ok = identical
    finally:
        _report(capsys, 11, "two identical-seed runs write byte-identical reports", ok)
    assert identical
