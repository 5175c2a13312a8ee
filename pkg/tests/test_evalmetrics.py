import random

import pytest

from vispell import evalmetrics as em
from vispell.textdata import Mistake, WikiTestDocument


def report_of(**kw):
    return em.finalize(em.EvalCounts(**kw))


class TestFinalize:
    def test_hand_arithmetic_case(self):
        rep = report_of(tp=2, fp=1, fn=1, n_exact_correction=1,
                        n_wrong_correction=1, n_wrong_detection=1)
        assert abs(rep.precision - 2 / 3) < 1e-12
        assert abs(rep.recall - 2 / 3) < 1e-12
        assert abs(rep.f1 - 2 / 3) < 1e-12
        assert abs(rep.acc_in_detected - 0.5) < 1e-12
        assert abs(rep.acc_in_total - 1 / 3) < 1e-12

    def test_all_zero_counts(self):
        rep = report_of()
        assert (rep.precision, rep.recall, rep.f1) == (0.0, 0.0, 0.0)
        assert (rep.acc_in_detected, rep.acc_in_total) == (0.0, 0.0)

    def test_perfect_model_table_prints_100_everywhere(self):
        rep = report_of(tp=5, n_exact_correction=5)
        table = rep.table()
        assert table.count("100.00") == 5
        assert "Precision" in table and "in % detected" in table

    def test_table2_f1_consistency(self):
        # published char-word row: P 66.96, R 70.92, F1 68.88
        p, r = 0.6696, 0.7092
        f1 = 2 * p * r / (p + r)
        assert abs(f1 * 100 - 68.88) < 0.05

    def test_invariant_corrections_bounded_by_tp(self):
        with pytest.raises(ValueError):
            report_of(tp=1, n_exact_correction=1, n_wrong_correction=1,
                      fp=0, n_wrong_detection=0)

    def test_invariant_wrong_detection_equals_fp(self):
        with pytest.raises(ValueError):
            report_of(fp=2, n_wrong_detection=1)

    def test_acc_total_never_exceeds_acc_detected(self):
        rng = random.Random(0)
        for _ in range(200):
            tp = rng.randint(0, 20)
            exact = rng.randint(0, tp)
            wrong = rng.randint(0, tp - exact)
            fp = rng.randint(0, 10)
            rep = report_of(tp=tp, fp=fp, fn=rng.randint(0, 10),
                            n_exact_correction=exact, n_wrong_correction=wrong,
                            n_wrong_detection=fp)
            assert rep.acc_in_total <= rep.acc_in_detected + 1e-12


class TestAccumulate:
    def test_perfect_two_error_sentence(self):
        counts = em.accumulate([1, 1], ["hà", "nội"], [True, True], ["hà", "nội"])
        assert (counts.tp, counts.fp, counts.fn) == (2, 0, 0)
        assert counts.n_exact_correction == 2
        assert counts.n_wrong_correction == 0

    def test_flagging_clean_token_is_wrong_detection(self):
        counts = em.accumulate([0], ["hà"], [True], ["gì"])
        assert counts.fp == counts.n_wrong_detection == 1

    def test_paper_ha_loi_example(self):
        # gold "hà nội" corrupted to "hà lội"; model flags token 2, suggests nội
        counts = em.accumulate([0, 1], [None, "nội"], [False, True], [None, "nội"])
        assert counts.tp == 1
        assert counts.n_exact_correction == 1
        rep = em.finalize(counts)
        assert rep.recall == 1.0 and rep.acc_in_total == 1.0

    def test_missed_error_is_fn_only(self):
        counts = em.accumulate([1], ["nội"], [False], [None])
        assert (counts.tp, counts.fn) == (0, 1)
        assert counts.n_exact_correction + counts.n_wrong_correction == 0

    def test_any_listed_suggestion_counts_as_exact(self):
        counts = em.accumulate([1], [["chiếc", "chíêc"]], [True], ["chíêc"])
        assert counts.n_exact_correction == 1

    def test_correction_eligibility_excludes_oov_gold(self):
        counts = em.accumulate([1], ["nội"], [True], ["gì"],
                               correction_eligible=[False])
        assert counts.tp == 1
        assert counts.n_exact_correction + counts.n_wrong_correction == 0

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            em.accumulate([1, 0], ["a"], [True], ["a"])

    def test_counts_are_additive(self):
        a = em.accumulate([1, 0], ["x", None], [True, True], ["x", "y"])
        b = em.accumulate([1], ["z"], [False], [None])
        merged = a + b
        whole = em.accumulate([1, 0, 1], ["x", None, "z"],
                              [True, True, False], ["x", "y", None])
        assert merged == whole


def make_doc(doc_id="d1", text="một chuếc máy bay", mistakes=((1, "chuếc", ["chiếc"]),)):
    return WikiTestDocument(
        id=doc_id, text=text, current_revision_id="c", previous_revision_id="p",
        page_id="g",
        mistakes=[Mistake(i, w, list(s)) for i, w, s in mistakes])


class TestEvaluateTestset:
    def test_empty_docs(self):
        rep = em.evaluate_testset([], lambda toks: [])
        assert rep.counts == em.EvalCounts()

    def test_perfect_model_on_table1_style_doc(self):
        doc = make_doc()

        def perfect(tokens):
            return [(tok == "chuếc", "chiếc" if tok == "chuếc" else None)
                    for tok in tokens]

        rep = em.evaluate_testset([doc], perfect)
        assert rep.recall == 1.0
        assert rep.acc_in_total == 1.0

    def test_deterministic(self):
        docs = [make_doc(), make_doc("d2", "hà lội ơi", ((1, "lội", ["nội"]),))]

        def flaky_looking(tokens):
            return [(len(tok) > 2, tok[:-1] or None) for tok in tokens]

        assert em.evaluate_testset(docs, flaky_looking) == \
               em.evaluate_testset(docs, flaky_looking)

    def test_sentence_order_invariant(self):
        docs = [make_doc(), make_doc("d2", "hà lội ơi", ((1, "lội", ["nội"]),))]

        def model(tokens):
            return [(tok in ("chuếc", "lội"), "fix") for tok in tokens]

        assert em.evaluate_testset(docs, model).counts == \
               em.evaluate_testset(list(reversed(docs)), model).counts

    def test_prediction_length_mismatch(self):
        with pytest.raises(ValueError, match="d1"):
            em.evaluate_testset([make_doc()], lambda toks: [(False, None)])


class TestBruteForceOracle:
    def test_finalize_matches_recount_from_token_pairs(self):
        rng = random.Random(7)
        vocab = ["an", "ba", "cá", "dê", "em"]
        for _ in range(30):
            n = rng.randint(1, 12)
            gold_mask = [rng.randint(0, 1) for _ in range(n)]
            gold = [rng.choice(vocab) for _ in range(n)]
            flags = [rng.random() < 0.5 for _ in range(n)]
            top1 = [rng.choice(vocab + [None]) for _ in range(n)]

            counts = em.accumulate(gold_mask, gold, flags, top1)
            rep = em.finalize(counts)

            # independent recount
            tp = sum(1 for g, f in zip(gold_mask, flags) if g and f)
            fp = sum(1 for g, f in zip(gold_mask, flags) if not g and f)
            fn = sum(1 for g, f in zip(gold_mask, flags) if g and not f)
            exact = sum(1 for g, f, s, w in zip(gold_mask, flags, top1, gold)
                        if g and f and s == w)
            wrongc = tp - exact
            prec = tp / (tp + fp) if tp + fp else 0.0
            rec = tp / (tp + fn) if tp + fn else 0.0
            f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
            assert counts.tp == tp and counts.fp == fp and counts.fn == fn
            assert counts.n_exact_correction == exact
            assert counts.n_wrong_correction == wrongc
            assert abs(rep.f1 - f1) < 1e-12
            acc_total = exact / (exact + wrongc + fp) if exact + wrongc + fp else 0.0
            assert abs(rep.acc_in_total - acc_total) < 1e-12
