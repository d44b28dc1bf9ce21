import random

import numpy as np
import pytest

from mntts_frontend.errors import ToolkitError
from mntts_frontend.predictor import (
    DEFAULT_BUCKETS,
    EmptyCorpusError,
    ModelFormatError,
    ModelVersionError,
    DimensionMismatchError,
    ProsodyModel,
    feature_dim,
    featurize,
    load_model,
    predict,
    save_model,
    train,
    training_accuracy,
    word_bucket,
)
from mntts_frontend.prosody import BreakLevel, ProsodyAnnotation, Utterance

VOCAB = ["сайн", "уу", "би", "та", "монгол", "хэл", "ном", "ус", "гал", "морь"]


def separable_corpus(n, seed=5):
    """Break after a word is B1 exactly when the word carries punctuation."""
    rng = random.Random(seed)
    corpus = []
    for _ in range(n):
        k = rng.randrange(2, 6)
        words = [rng.choice(VOCAB) for _ in range(k)]
        puncts = [rng.choice(["", "", ","]) for _ in range(k)]
        breaks = [
            BreakLevel.B1 if puncts[i] else BreakLevel.B0 for i in range(k - 1)
        ]
        breaks.append(BreakLevel.B3)
        corpus.append(
            ProsodyAnnotation(Utterance.from_words(words, puncts), tuple(breaks))
        )
    return corpus


def all_b0_corpus(n, seed=6):
    rng = random.Random(seed)
    corpus = []
    for _ in range(n):
        k = rng.randrange(2, 5)
        words = [rng.choice(VOCAB) for _ in range(k)]
        breaks = [BreakLevel.B0] * (k - 1) + [BreakLevel.B3]
        corpus.append(
            ProsodyAnnotation(Utterance.from_words(words), tuple(breaks))
        )
    return corpus


def test_featurize_single_word_position_ratio():
    vec = featurize(Utterance.from_words(["сайн"]), 0, [], buckets=16)
    assert vec[2] == 1.0  # position ratio slot


def test_featurize_position_ratio_progression():
    utt = Utterance.from_words(["а", "б", "в", "г"])
    history = []
    ratios = []
    for i in range(4):
        ratios.append(featurize(utt, i, history, buckets=16)[2])
        history.append(BreakLevel.B0)
    assert ratios == [0.25, 0.5, 0.75, 1.0]


def test_featurize_same_word_same_bucket():
    utt = Utterance.from_words(["сайн", "уу", "сайн"])
    v0 = featurize(utt, 0, [], buckets=64)
    v2 = featurize(utt, 2, [BreakLevel.B0, BreakLevel.B0], buckets=64)
    base = feature_dim(64) - 64
    assert np.argmax(v0[base:]) == np.argmax(v2[base:])
    assert word_bucket("сайн", 64) == np.argmax(v0[base:])


def test_featurize_out_of_range():
    utt = Utterance.from_words(["а", "б"])
    with pytest.raises(ToolkitError):
        featurize(utt, 2, [BreakLevel.B0, BreakLevel.B0])


def test_featurize_punct_flag_and_lengths():
    utt = Utterance.from_words(["сайн", "уу"], ["", "."])
    v0 = featurize(utt, 0, [], buckets=16)
    assert v0[0] == 4.0 and v0[1] == 2.0 and v0[3] == 0.0
    v1 = featurize(utt, 1, [BreakLevel.B0], buckets=16)
    assert v1[0] == 2.0 and v1[1] == 0.0 and v1[3] == 1.0


def test_featurize_history_one_hot():
    utt = Utterance.from_words(["а", "б", "в"])
    v0 = featurize(utt, 0, [], buckets=16)
    assert v0[4] == 1.0  # no-previous indicator
    v1 = featurize(utt, 1, [BreakLevel.B2], buckets=16)
    assert v1[4] == 0.0 and v1[4 + 1 + 2] == 1.0


def test_train_empty_corpus():
    with pytest.raises(EmptyCorpusError):
        train([])


def test_train_degenerate_all_b0():
    corpus = all_b0_corpus(10)
    model = train(corpus, epochs=3, seed=1, buckets=64)
    assert training_accuracy(model, corpus) == 1.0
    for annotation in corpus:
        predicted = predict(model, annotation.utterance)
        assert predicted.breaks == annotation.breaks


def test_train_deterministic_byte_identical(tmp_path):
    corpus = separable_corpus(20)
    a, b = tmp_path / "a.bin", tmp_path / "b.bin"
    save_model(train(corpus, epochs=5, seed=7, buckets=64), a)
    save_model(train(corpus, epochs=5, seed=7, buckets=64), b)
    assert a.read_bytes() == b.read_bytes()


def test_train_seed_changes_shuffle_order(tmp_path):
    corpus = separable_corpus(20)
    m1 = train(corpus, epochs=1, seed=1, buckets=64)
    m2 = train(corpus, epochs=1, seed=2, buckets=64)
    # different example order gives different intermediate averages
    assert not np.array_equal(m1.weights, m2.weights)


def test_train_converges_on_separable_fixture():
    corpus = separable_corpus(30)
    model = train(corpus, epochs=20, seed=7, buckets=64)
    assert training_accuracy(model, corpus) == 1.0


def test_predict_zero_model_tie_breaks_low():
    model = ProsodyModel(np.zeros((4, feature_dim(16))), 16, 0, 0)
    utt = Utterance.from_words(["а", "б", "в"])
    assert predict(model, utt).breaks == (
        BreakLevel.B0,
        BreakLevel.B0,
        BreakLevel.B3,
    )


def test_predict_single_word():
    model = ProsodyModel(np.zeros((4, feature_dim(16))), 16, 0, 0)
    assert predict(model, Utterance.from_words(["а"])).breaks == (BreakLevel.B3,)


def test_predict_separable_model_on_unseen_text():
    model = train(separable_corpus(30), epochs=20, seed=7, buckets=64)
    unseen = Utterance.from_words(["гал", "ус", "ном"], ["", ",", ""])
    predicted = predict(model, unseen)
    assert predicted.breaks[1] is BreakLevel.B1
    assert predicted.breaks[-1] is BreakLevel.B3


def test_predict_always_structurally_valid():
    model = train(separable_corpus(10), epochs=5, seed=3, buckets=64)
    rng = random.Random(9)
    for _ in range(50):
        k = rng.randrange(1, 7)
        utt = Utterance.from_words(
            [rng.choice(VOCAB) for _ in range(k)],
            [rng.choice(["", ","]) for _ in range(k)],
        )
        ann = predict(model, utt)
        assert len(ann.breaks) == k
        assert ann.breaks[-1] is BreakLevel.B3


def test_argmax_scale_invariance():
    model = train(separable_corpus(15), epochs=5, seed=2, buckets=64)
    rng = random.Random(10)
    for gain in (0.001, 0.5, 3.0, 1000.0):
        scaled = ProsodyModel(model.weights * gain, model.buckets, model.epochs, model.seed)
        for _ in range(20):
            k = rng.randrange(1, 6)
            utt = Utterance.from_words([rng.choice(VOCAB) for _ in range(k)])
            assert predict(model, utt) == predict(scaled, utt)


def test_save_load_round_trip(tmp_path):
    model = train(separable_corpus(10), epochs=3, seed=4, buckets=32)
    path = tmp_path / "m.bin"
    save_model(model, path)
    loaded = load_model(path)
    assert loaded == model
    assert loaded.weights.dtype == np.float64


def test_load_wrong_magic(tmp_path):
    path = tmp_path / "m.bin"
    path.write_bytes(b"XXXX" + b"\x00" * 64)
    with pytest.raises(ModelFormatError, match="magic"):
        load_model(path)


def test_load_future_version(tmp_path):
    model = train(separable_corpus(5), epochs=1, seed=0, buckets=16)
    path = tmp_path / "m.bin"
    save_model(model, path)
    raw = bytearray(path.read_bytes())
    raw[4:6] = (99).to_bytes(2, "little")
    path.write_bytes(bytes(raw))
    with pytest.raises(ModelVersionError, match="99"):
        load_model(path)


def test_load_truncated_weights(tmp_path):
    model = train(separable_corpus(5), epochs=1, seed=0, buckets=16)
    path = tmp_path / "m.bin"
    save_model(model, path)
    path.write_bytes(path.read_bytes()[:-16])
    with pytest.raises(ModelFormatError, match="weight bytes"):
        load_model(path)


def test_model_rejects_wrong_shape():
    with pytest.raises(DimensionMismatchError):
        ProsodyModel(np.zeros((4, 10)), DEFAULT_BUCKETS, 0, 0)


def test_default_feature_dim_documented_value():
    # 4 dense slots + 5 history slots + one-hot buckets
    assert feature_dim(4096) == 4105
