"""The learned peace index is 100 x P(higher peace) from a two-class logistic model.

Blend a lower- and a higher-peace country's word profile and watch the index slide between them.

    python demos/03_peace_index_interpolation.py
"""
import warnings

import numpy as np

from peacewords.learners import train_logistic
from peacewords.scoring import ml_peace_index, rank_countries, score_rows
from peacewords.synthetic import corpus_features, make_corpus

warnings.simplefilter("ignore")

# Train on the extremes only; intermediate countries are scored but never seen in training.
corpus = make_corpus(n_intermediate=4, seed=2)
fm, _ = corpus_features(corpus.articles, k=100)
train = [c for c in fm.countries if not c.startswith("M")]
sub = fm.subset(train)
model = train_logistic(sub.values, [int(corpus.labels[c]) for c in train])

# %% Ranking: the unseen M countries fall between the two training groups.
for r in rank_countries(score_rows(model, fm.countries, fm.values)):
    print(f"{r.rank:3d}  {r.country}  {r.ml_index:6.2f}")

# %% A straight line in feature space is a straight line in log-odds, so the index is monotone.
lo, hi = fm.row("L01"), fm.row("H01")
print("\nlambda  index")
for lam in np.linspace(0, 1, 11):
    s = ml_peace_index(model, (1 - lam) * lo + lam * hi)
    print(f"{lam:6.1f}  {s.index:6.2f}  {s.classified_as.name.lower()}")
