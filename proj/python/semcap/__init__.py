"""Caption image embeddings by consensus over their nearest captioned neighbors."""

from ._semcap import (
    Dataset,
    Error,
    SearchIndex,
    bundled_stopwords,
    distance,
    eval_unigram_f1,
    frequency_table,
    select_caption,
    tokenize,
)

__all__ = [
    "Dataset",
    "Error",
    "SearchIndex",
    "bundled_stopwords",
    "distance",
    "eval_unigram_f1",
    "frequency_table",
    "select_caption",
    "tokenize",
]
