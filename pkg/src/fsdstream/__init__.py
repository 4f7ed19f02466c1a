"""Streaming first-story detection for short texts.

A chronologically ordered corpus is clustered into topic threads: each
document joins the thread of its nearest neighbor among the most recent
documents when the cosine distance falls below a threshold, and opens a new
thread otherwise. The package also ships the evaluation harness (best-matching
F1, macro-F1 with a triangular-kernel SVM) used to compare vector
representations on this task.
"""

from .classify import (
    KernelSvmModel,
    TriangularKernelSVC,
    cross_kernel,
    kernel_matrix,
    load_models,
    predict,
    save_models,
    train_ovr_svm,
    triangular_kernel,
)
from .cluster import (
    FirstStoryDetector,
    FsdParams,
    SweepResult,
    SweepRow,
    ThreadAssignment,
    fsd_cluster,
    sweep_threshold,
    window_for_one_day,
)
from .config import DEFAULT_SWEEP_GRID, VECTOR_SOURCES, RunConfig, load_config
from .corpus import Corpus, Tweet, load_corpus, save_corpus, split_train_test
from .embeddings import (
    TweetVectorFile,
    WordVectorAverager,
    WordVectorTable,
    average_embedding,
    load_tweet_vectors,
    load_word_vectors,
    normalize_dense,
    save_tweet_vectors,
)
from .errors import FsdError, InternalError, MissingResourceError, ValidationError
from .evaluate import EvalReport, EventMatch, best_matching_f1, macro_f1, pair_f1
from .preprocess import DEFAULT_TOKENIZER, TokenizerConfig, load_stopwords, tokenize
from .vectorize import (
    IdfVectorizer,
    SparseVector,
    Vocabulary,
    build_vocabulary,
    idf_weight,
    sparse_dot,
    vectorize_idf,
)
from .window import WindowBuffer, WindowEntry, cosine_distance, nearest_neighbor

__version__ = "0.1.0"
