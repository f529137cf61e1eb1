"""
Two-step retrieval quickstart
=============================

Generate a small synthetic corpus, build the question-scope pair index,
and run a few searches end to end.
"""

from qbr import HashEmbedder, build_index, gen_synthetic, identity_adapter, search
from qbr.corpus import scope_text

# a corpus of 8 documents, each split into 3 scopes with 2 questions per scope
corpus, testset = gen_synthetic(n_docs=8, scopes_per_doc=3,
                                questions_per_scope=2, overlap=0.6, seed=7)
print(f"{len(corpus.documents)} documents, {len(corpus.scopes)} scopes, "
      f"{len(corpus.qb)} question bank entries")

provider = HashEmbedder(dim=128)
index = build_index(corpus, provider)
adapter = identity_adapter(provider.dim, provider.fingerprint)

# take a real test question and retrieve the top 3 (document, scope) answers
case = testset[0]
print(f"\nquery: {case.user_input!r}")
print(f"gold:  {case.gold_doc_id} / {case.gold_scope_id}\n")

warnings = []
for hit in search(corpus, index, provider, adapter, case.user_input, k=3,
                  warnings=warnings):
    snippet = hit.scope_text.replace("\n", " ")[:60]
    print(f"  #{hit.rank} doc={hit.doc_id} ({hit.doc_score:.3f}) "
          f"scope={hit.scope_id} ({hit.scope_score:.3f})")
    print(f"     via question: {hit.question!r}")
    print(f"     scope text:   {snippet}...")

# step 1 works on question-scope pairs, so the matched question explains
# why a document was selected; print the raw scope for the top hit
top = search(corpus, index, provider, adapter, case.user_input, k=1)[0]
print(f"\nfull text of winning scope {top.scope_id}:")
print(scope_text(corpus, top.scope_id))
