"""Topic extraction: reduction, density clustering, c-TF-IDF, MMR."""

from oneirotax.topics.build import (
    BANNED_UNIGRAMS,
    ClusteringParams,
    Topic,
    TopicModel,
    build_topics,
    doc_topics,
    merge_similar_topics,
    rank_clusters,
    strip_and_renormalize,
)
from oneirotax.topics.ctfidf import ctfidf_scores
from oneirotax.topics.density import DensityClustering, density_cluster
from oneirotax.topics.mmr import mmr_diversify
from oneirotax.topics.reduce import pca_reduce, random_projection, reduce
from oneirotax.topics.tokenize import content_tokens, terms_of, tokenize

__all__ = [
    "BANNED_UNIGRAMS", "ClusteringParams", "Topic", "TopicModel",
    "build_topics", "doc_topics", "merge_similar_topics", "rank_clusters",
    "strip_and_renormalize", "ctfidf_scores", "DensityClustering",
    "density_cluster", "mmr_diversify", "pca_reduce", "random_projection",
    "reduce", "content_tokens", "terms_of", "tokenize",
]
