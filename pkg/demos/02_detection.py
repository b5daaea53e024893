"""Modal target detection in tokenized sentences.

The detector finds the closed class {can, could, may, might, must, should},
folds case, resolves contracted and separate negations, and drops the two
dominant homograph families ("a can of ...", "in May 2019") with blocklist
rules rather than a POS tagger.
"""

from mistkit.detect import detect_modals

EXAMPLES = [
    ["This", "sensor", "can", "both", "respond", "to", "pressure"],
    ["We", "cannot", "exclude", "this", "possibility"],
    ["The", "model", "could", "n't", "converge"],
    ["Samples", "mustn't", "be", "contaminated"],
    ["He", "opened", "a", "can", "of", "solvent"],      # noun, not a modal
    ["Published", "in", "May", "2019"],                 # month, not a modal
    ["results", "may", "vary"],
    ["we", "can", "and", "should", "act"],              # two targets
    ["if", "we", "can", "."],                           # elliptical use kept
]

for tokens in EXAMPLES:
    targets = detect_modals(tokens)
    rendered = " ".join(tokens)
    if not targets:
        print(f"{rendered!r:55s} -> no targets")
    for t in targets:
        neg = " (negated)" if t.negated else ""
        print(f"{rendered!r:55s} -> index {t.token_index}: {t.modal}{neg}")
