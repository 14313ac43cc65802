"""Topic modeling with non-negative matrix factorization.

Classical, semantic (SPPMI-coupled), hierarchical and (semi-)supervised NMF
over tf-idf term-document matrices, with scikit-learn style estimators.
"""

from .cooccurrence import ContextMatrix, SppmiMatrix, count_cooccurrences, sppmi
from .corpus import Corpus, CorpusError, LabelSet, load_corpus, load_labels
from .hierarchy import (BottomUpHNMF, LayerChain, TopDownHNMF, TopicNode, TopicTree,
                        bottomup_hnmf, layer_dictionary, merge_map, topdown_hnmf)
from .nmf import (Factorization, MultiplicativeNMF, SolverOptions, assign_documents, nmf,
                  residual, topic_keywords)
from .semantic import SemanticNMF, TriFactorization, semantic_nmf
from .supervised import (LabelMatrix, MaskMatrix, SemiSupervisedNMF, SupervisedModel,
                         SupervisedNMFClassifier, binarize_prediction, las, snmf_predict,
                         snmf_train, split_train_test, ssnmf)
from .synth import PlantedSpec, generate, permutation_accuracy
from .text import (TermDocumentMatrix, TfidfTermVectorizer, VectorizerParams, Vocabulary,
                   build_vocabulary, highlight_keywords, tfidf_matrix, tokenize)

__version__ = "0.1.0"
