"""Text featurization: cleaning, TF-IDF, and lexicon sentiment scoring.

Documents pass through a fixed pipeline: alphabetic-run tokenization
(no stemming, no lemmatization, so domain terms survive intact), then
two parallel feature extractors whose outputs concatenate into one
dense vector per document:

    * a TF-IDF model over the training corpus (smoothed idf, raw term
      frequency, L2 normalization), capped at ``max_features`` terms;
    * a 50-dimensional sentiment block from a finance lexicon: per
      category raw counts and densities, net sentiment, polarity, and
      the per-document frequencies of the 36 lexicon terms most common
      in the training corpus.

Sentiment scoring is negation-aware: a positive or negative word whose
preceding window contains an unconsumed negator is tallied in the
opposite polarity category; each negator flips at most one word.
Non-polar categories (uncertainty, litigious, modal) never flip.
"""

from __future__ import annotations

import csv
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    EmptyAfterCleaning,
    EmptyCorpus,
    ParseError,
    ZeroLengthDocument,
)
from .ingest import DocumentRecord

CATEGORY_ORDER = (
    "positive",
    "negative",
    "uncertainty",
    "litigious",
    "strong_modal",
    "weak_modal",
)

DEFAULT_NEGATORS = frozenset({"no", "not", "never", "none", "neither", "nor", "without"})

DEFAULT_NEGATION_WINDOW = 3

N_TOP_TERMS = 36

LM_FEATURE_COUNT = 2 * len(CATEGORY_ORDER) + 2 + N_TOP_TERMS  # 50

_TOKEN_RE = re.compile(r"[a-z]+")


@dataclass(frozen=True)
class TokenizedDocument:
    """A cleaned document: ordered lowercase alphabetic tokens."""

    doc_id: str
    tokens: tuple[str, ...]

    @property
    def token_count(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class Lexicon:
    """Sentiment word lists plus the negator set.

    ``categories`` always carries all six category keys; restricting a
    category (e.g. running with the four-category variant) is done by
    leaving its word set empty, which keeps feature shapes fixed.
    """

    categories: Mapping[str, frozenset[str]]
    negators: frozenset[str] = DEFAULT_NEGATORS

    def __post_init__(self):
        missing = [c for c in CATEGORY_ORDER if c not in self.categories]
        if missing:
            raise ValueError(f"lexicon missing categories: {missing}")
        if not self.negators:
            raise ValueError("negator set must be non-empty")

    def all_terms(self) -> frozenset[str]:
        out: set[str] = set()
        for cat in CATEGORY_ORDER:
            out |= self.categories[cat]
        return frozenset(out)


@dataclass(frozen=True)
class TfidfModel:
    """Fitted TF-IDF basis: vocabulary, per-term df, corpus size."""

    vocabulary: tuple[str, ...]
    document_frequency: tuple[int, ...]
    n_docs: int

    _index: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(
            self, "_index", {t: i for i, t in enumerate(self.vocabulary)}
        )

    @property
    def idf(self) -> np.ndarray:
        df = np.asarray(self.document_frequency, dtype=float)
        return np.log((1.0 + self.n_docs) / (1.0 + df)) + 1.0


@dataclass(frozen=True)
class LmSentimentFeatures:
    """The fixed 50-feature sentiment block for one document."""

    counts: Mapping[str, int]
    densities: Mapping[str, float]
    net_sentiment: float
    polarity: float
    term_freqs: tuple[tuple[str, float], ...]

    @property
    def names(self) -> tuple[str, ...]:
        return lm_feature_names(tuple(t for t, _ in self.term_freqs))

    @property
    def values(self) -> np.ndarray:
        vals = [float(self.counts[c]) for c in CATEGORY_ORDER]
        vals += [self.densities[c] for c in CATEGORY_ORDER]
        vals += [self.net_sentiment, self.polarity]
        vals += [f for _, f in self.term_freqs]
        return np.asarray(vals, dtype=float)


@dataclass(frozen=True)
class TextFeatureVector:
    """Concatenated [tfidf..., lm...] features with aligned names."""

    values: np.ndarray
    names: tuple[str, ...]

    def __post_init__(self):
        if len(self.values) != len(self.names):
            raise ValueError("values and names must align")


def lm_feature_names(top_terms: Sequence[str]) -> tuple[str, ...]:
    """Names of the 50 sentiment features, given the top-term list.

    Slots beyond the available terms are padded so the shape is always
    exactly 50.
    """
    names = [f"lm_count_{c}" for c in CATEGORY_ORDER]
    names += [f"lm_density_{c}" for c in CATEGORY_ORDER]
    names += ["lm_net_sentiment", "lm_polarity"]
    terms = list(top_terms)[:N_TOP_TERMS]
    names += [f"lm_term_{t}" for t in terms]
    names += [f"lm_term_pad_{i}" for i in range(N_TOP_TERMS - len(terms))]
    return tuple(names)


def clean_and_tokenize(
    record: DocumentRecord, stopwords: Iterable[str] = frozenset()
) -> TokenizedDocument:
    """Lowercase, split into alphabetic runs, drop short/stop words.

    Hyphenated or digit-bearing words split at the non-alphabetic
    characters ("rate-setting" yields "rate", "setting"). Tokens of
    length < 2 and stopwords are dropped. Token order is preserved;
    negation scoring depends on it.

    Raises:
        EmptyAfterCleaning: no token survives.
    """
    stop = frozenset(stopwords)
    tokens = tuple(
        t
        for t in _TOKEN_RE.findall(record.text.lower())
        if len(t) >= 2 and t not in stop
    )
    if not tokens:
        raise EmptyAfterCleaning(record.doc_id)
    return TokenizedDocument(doc_id=record.doc_id, tokens=tokens)


def score_lm_sentiment(
    doc: TokenizedDocument,
    lexicon: Lexicon,
    negation_window: int = DEFAULT_NEGATION_WINDOW,
    top_terms: Sequence[str] = (),
) -> LmSentimentFeatures:
    """Score one document against the lexicon.

    A token in the positive (resp. negative) category is tallied in the
    opposite category when one of the ``negation_window`` tokens before
    it is a negator that has not already flipped an earlier word; the
    nearest unconsumed negator is used. Uncertainty, litigious and modal
    counts ignore negation. Densities divide by the token count;
    ``net_sentiment = (pos - neg) / n`` and
    ``polarity = (pos - neg) / (pos + neg + 1)``.

    ``top_terms`` (from :func:`select_top_lexicon_terms`) fixes which
    per-term frequency slots are emitted.

    Raises:
        ZeroLengthDocument: the document has no tokens.
    """
    n = doc.token_count
    if n == 0:
        raise ZeroLengthDocument(doc.doc_id)

    counts = {c: 0 for c in CATEGORY_ORDER}
    consumed: set[int] = set()
    tokens = doc.tokens

    def nearest_free_negator(i: int) -> int:
        lo = max(0, i - negation_window)
        for j in range(i - 1, lo - 1, -1):
            if tokens[j] in lexicon.negators and j not in consumed:
                return j
        return -1

    for i, tok in enumerate(tokens):
        for cat in CATEGORY_ORDER:
            if tok not in lexicon.categories[cat]:
                continue
            if cat in ("positive", "negative"):
                negator_at = nearest_free_negator(i)
                if negator_at >= 0:
                    consumed.add(negator_at)
                    counts["negative" if cat == "positive" else "positive"] += 1
                else:
                    counts[cat] += 1
            else:
                counts[cat] += 1

    densities = {c: counts[c] / n for c in CATEGORY_ORDER}
    pos, neg = counts["positive"], counts["negative"]
    net = (pos - neg) / n
    polarity = (pos - neg) / (pos + neg + 1)

    occurrences = Counter(tokens)
    terms = list(top_terms)[:N_TOP_TERMS]
    freqs = [(t, occurrences.get(t, 0) / n) for t in terms]
    freqs += [(f"pad_{i}", 0.0) for i in range(N_TOP_TERMS - len(terms))]

    return LmSentimentFeatures(
        counts=counts,
        densities=densities,
        net_sentiment=net,
        polarity=polarity,
        term_freqs=tuple(freqs),
    )


def select_top_lexicon_terms(
    corpus: Sequence[TokenizedDocument],
    lexicon: Lexicon,
    n_terms: int = N_TOP_TERMS,
) -> tuple[str, ...]:
    """The ``n_terms`` lexicon words most frequent in the corpus.

    Frequency is the total occurrence count across all documents; ties
    break by ascending lexicographic order. Fit this on the training
    split only.
    """
    if not corpus:
        raise EmptyCorpus("cannot select lexicon terms from an empty corpus")
    lex_terms = lexicon.all_terms()
    totals: Counter[str] = Counter()
    for doc in corpus:
        for tok in doc.tokens:
            if tok in lex_terms:
                totals[tok] += 1
    ranked = sorted(totals.items(), key=lambda kv: (-kv[1], kv[0]))
    return tuple(t for t, _ in ranked[:n_terms])


def fit_tfidf(
    corpus: Sequence[TokenizedDocument], max_features: int = 500
) -> TfidfModel:
    """Fit the TF-IDF basis on a corpus (training split only).

    The vocabulary keeps the ``max_features`` terms with the highest
    document frequency; df ties break by ascending lexicographic order.

    Raises:
        EmptyCorpus.
    """
    if not corpus:
        raise EmptyCorpus("cannot fit TF-IDF on an empty corpus")
    df: Counter[str] = Counter()
    for doc in corpus:
        for term in set(doc.tokens):
            df[term] += 1
    ranked = sorted(df.items(), key=lambda kv: (-kv[1], kv[0]))[:max_features]
    return TfidfModel(
        vocabulary=tuple(t for t, _ in ranked),
        document_frequency=tuple(c for _, c in ranked),
        n_docs=len(corpus),
    )


def transform_tfidf(model: TfidfModel, doc: TokenizedDocument) -> np.ndarray:
    """Map a document onto the fitted basis.

    Weight per vocabulary term t is ``tf * (ln((1+N)/(1+df_t)) + 1)``
    with raw term counts; the vector is L2-normalized (all-zero vectors
    stay zero). Out-of-vocabulary tokens are ignored, so unseen
    documents are fine.
    """
    vec = np.zeros(len(model.vocabulary), dtype=float)
    if not model.vocabulary:
        return vec
    index = model._index
    for term, count in Counter(doc.tokens).items():
        j = index.get(term)
        if j is not None:
            vec[j] = count
    nonzero = vec.nonzero()[0]
    if nonzero.size == 0:
        return vec
    idf = model.idf
    vec[nonzero] *= idf[nonzero]
    vec /= math.sqrt(float(np.dot(vec, vec)))
    return vec


def combine_text_features(
    tfidf_vec: np.ndarray,
    lm: LmSentimentFeatures,
    vocabulary: Sequence[str],
) -> TextFeatureVector:
    """Concatenate [tfidf..., lm...] with the fixed naming scheme.

    Names are ``tfidf_<term>`` for the TF-IDF block (aligned with
    ``vocabulary``) followed by the 50 ``lm_*`` names.
    """
    if len(tfidf_vec) != len(vocabulary):
        raise ValueError("tfidf vector does not align with vocabulary")
    names = tuple(f"tfidf_{t}" for t in vocabulary) + lm.names
    values = np.concatenate([np.asarray(tfidf_vec, dtype=float), lm.values])
    return TextFeatureVector(values=values, names=names)


@dataclass(frozen=True)
class TextFeaturizer:
    """Fitted text pipeline: TF-IDF basis + lexicon scoring setup.

    Fit on the training split; transforms any document thereafter.
    """

    tfidf: TfidfModel
    lexicon: Lexicon
    top_terms: tuple[str, ...]
    negation_window: int = DEFAULT_NEGATION_WINDOW

    @classmethod
    def fit(
        cls,
        corpus: Sequence[TokenizedDocument],
        lexicon: Lexicon,
        max_features: int = 500,
        negation_window: int = DEFAULT_NEGATION_WINDOW,
        n_top_terms: int = N_TOP_TERMS,
    ) -> "TextFeaturizer":
        return cls(
            tfidf=fit_tfidf(corpus, max_features=max_features),
            lexicon=lexicon,
            top_terms=select_top_lexicon_terms(corpus, lexicon, n_terms=n_top_terms),
            negation_window=negation_window,
        )

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(f"tfidf_{t}" for t in self.tfidf.vocabulary) + lm_feature_names(
            self.top_terms
        )

    def transform(self, doc: TokenizedDocument) -> TextFeatureVector:
        lm = score_lm_sentiment(
            doc, self.lexicon, self.negation_window, self.top_terms
        )
        return combine_text_features(
            transform_tfidf(self.tfidf, doc), lm, self.tfidf.vocabulary
        )


# --- lexicon / word-list files ----------------------------------------------

def load_lexicon(
    path: str | Path,
    negators: Iterable[str] | None = None,
    categories: Iterable[str] | None = None,
) -> Lexicon:
    """Load a ``word,category`` CSV into a :class:`Lexicon`.

    Unknown category names are rejected to catch file typos early.
    ``categories`` restricts which ones are kept (e.g. the four-category
    variant); dropped categories stay in the map as empty sets so
    feature shapes never change.
    """
    keep = set(CATEGORY_ORDER) if categories is None else set(categories)
    unknown = keep - set(CATEGORY_ORDER)
    if unknown:
        raise ParseError(f"unknown lexicon categories requested: {sorted(unknown)}")
    cats: dict[str, set[str]] = {c: set() for c in CATEGORY_ORDER}
    with open(path, encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for line_no, row in enumerate(reader, start=1):
            if line_no == 1 and [c.strip().lower() for c in row[:2]] == ["word", "category"]:
                continue
            if not row or not row[0].strip():
                continue
            if len(row) < 2:
                raise ParseError(f"lexicon line {line_no}: expected 'word,category'")
            word, cat = row[0].strip().lower(), row[1].strip().lower()
            if cat not in cats:
                raise ParseError(f"lexicon line {line_no}: unknown category {cat!r}")
            if cat in keep:
                cats[cat].add(word)
    neg = frozenset(w.lower() for w in negators) if negators is not None else DEFAULT_NEGATORS
    return Lexicon(
        categories={c: frozenset(ws) for c, ws in cats.items()}, negators=neg
    )


def load_wordlist(path: str | Path) -> frozenset[str]:
    """One word per line; blank lines and ``#`` comments ignored."""
    words: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            w = line.strip().lower()
            if w and not w.startswith("#"):
                words.add(w)
    return frozenset(words)


def load_stopwords(
    path: str | Path, protect: Iterable[str] = frozenset()
) -> frozenset[str]:
    """Load stopwords, never removing protected (lexicon/negator) words."""
    return load_wordlist(path) - frozenset(protect)


# --- corpus statistics --------------------------------------------------------

@dataclass(frozen=True)
class CorpusStats:
    """Per-doc-type token-count summary and per-class top words."""

    doc_type_stats: tuple[tuple[str, int, int, float, int], ...]
    top_words: tuple[tuple[str, int, str, int], ...]

    def to_csv_text(self) -> str:
        lines = ["#doc_type_stats", "doc_type,n_docs,min_tokens,median_tokens,max_tokens"]
        for doc_type, n_docs, mn, med, mx in self.doc_type_stats:
            med_text = f"{med:g}"
            lines.append(f"{doc_type},{n_docs},{mn},{med_text},{mx}")
        if self.top_words:
            lines.append("#top_words")
            lines.append("class,rank,token,count")
            for cls, rank, token, count in self.top_words:
                lines.append(f"{cls},{rank},{token},{count}")
        return "\n".join(lines) + "\n"


def corpus_stats(
    corpus: Sequence[TokenizedDocument],
    doc_types: Mapping[str, str],
    labels: Mapping[str, str] | None = None,
    top_n: int = 25,
) -> CorpusStats:
    """Summaries replacing the usual corpus plots.

    Emits per-doc-type token-count min/median/max and, when ``labels``
    maps doc ids to decision classes, per-class top-``top_n`` token
    frequency lists.
    """
    by_type: dict[str, list[int]] = {}
    for doc in corpus:
        by_type.setdefault(doc_types.get(doc.doc_id, "unknown"), []).append(
            doc.token_count
        )
    type_rows = tuple(
        (t, len(ns), min(ns), float(np.median(ns)), max(ns))
        for t, ns in sorted(by_type.items())
    )

    word_rows: list[tuple[str, int, str, int]] = []
    if labels:
        by_class: dict[str, Counter[str]] = {}
        for doc in corpus:
            cls = labels.get(doc.doc_id)
            if cls is None:
                continue
            by_class.setdefault(cls, Counter()).update(doc.tokens)
        for cls in sorted(by_class):
            ranked = sorted(by_class[cls].items(), key=lambda kv: (-kv[1], kv[0]))
            for rank, (token, count) in enumerate(ranked[:top_n], start=1):
                word_rows.append((cls, rank, token, count))

    return CorpusStats(doc_type_stats=type_rows, top_words=tuple(word_rows))
