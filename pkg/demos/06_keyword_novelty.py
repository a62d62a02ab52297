"""Keyword embeddings and paper novelty."""
import numpy as np

from teamscope.corpus import parse_record
from teamscope.embeddings import train_embeddings
from teamscope.metrics import paper_novelty, typicality

rng = np.random.default_rng(0)
biology = [f"bio{i}" for i in range(8)]
physics = [f"phys{i}" for i in range(8)]
bags = [list(rng.choice(biology if rng.random() < 0.5 else physics, size=4, replace=False))
        for _ in range(400)]

model = train_embeddings(bags, dim=24, epochs=5, min_count=1, seed=0)
print(f"vocabulary {len(model.vocab)}, dim {model.dim}")
print(f"typicality bio0.bio1  = {typicality('bio0', 'bio1', model):+.3f}")
print(f"typicality bio0.phys0 = {typicality('bio0', 'phys0', model):+.3f}")

same_field = parse_record({"id": "a", "year": 2000, "authors": ["x"], "topics": biology[:4]})
mixed = parse_record({"id": "b", "year": 2000, "authors": ["x"], "topics": biology[:2] + physics[:2]})
for p in (same_field, mixed):
    print(f"paper {p.paper_id} topics {list(p.topics)}: novelty {paper_novelty(p, model).score:+.3f}")
