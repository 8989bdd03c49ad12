# Classifiers module
from .bdt import BdtModel, bdt_classify, bdt_train
from .enn import EnnModel, enn_classify, enn_classify_from_scratch, enn_preprocess
from .knn import KnnModel, knn_classify
from .serialization import ModelBundle, dumps_model, loads_model, train_bundle
from .voting import Prediction, VotingModel, vote
