"""Enriching Open-IE triples with classified modal functions.

capability and deontic rewrite the relation into templates
(hasCapabilityTo_*, isRequiredTo_* for must/should, isAllowedTo_*
otherwise, deontic winning when both apply); the remaining labels set a
factuality rating on the whole fact, least-certain first:
speculation > possible > inferred > true.
"""

from mistkit.enrich import Extraction, enrich

CASES = [
    (("sensor_X", "respond", "pressure"), "can", {"capability"}),
    (("films", "used_as", "protective_element"), "can", {"feasibility"}),
    (("catalyst_particles", "cause", "results_paper_X"), "may", {"speculation"}),
    (("composites", "open", "band_gaps"), "can", {"feasibility", "capability"}),
    (("protons", "have", "enough_energy"), "must", {"deontic"}),
    (("readers", "see", "figure_1"), "can", {"rhetorical"}),
    (("seas", "play", "driving_role"), "may", {"inference", "speculation"}),
]

for (subject, relation, obj), modal, labels in CASES:
    fact = enrich(
        Extraction(subject=subject, relation=relation, object=obj, inst_id="x"),
        modal,
        frozenset(labels),
    )
    label_text = "+".join(sorted(labels))
    print(f"({subject}; {relation}; {obj})  [{modal}: {label_text}]")
    print(f"   -> ({fact.subject}; {fact.relation}; {fact.object})  "
          f"hasFactualityRating({fact.factuality})\n")
