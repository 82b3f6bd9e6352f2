"""Walk through discourse segmentation on a hand-built answer tree.

Run: python3 demos/segmentation_walkthrough.py
"""

from discotrace import BoundaryConfig, parse_rst_tree, segment_answer


def leaf(text):
    return {"edu": text}


def node(relation, nuclearity, left, right):
    return {"relation": relation, "nuclearity": nuclearity, "left": left, "right": right}


# An answer with a contrastive pivot: the Contrast node is a boundary, so
# the two halves become separate action segments. Inside each half the
# Elaboration nodes keep their spans together.
doc = node(
    "Contrast", "NN",
    node("Elaboration", "NS",
         leaf("Short answer: mostly Rayleigh scattering."),
         leaf("Shorter wavelengths scatter far more strongly.")),
    node("Elaboration", "NS",
         node("Joint", "NN",
              leaf("But violet light scatters even more than blue,"),
              leaf("and yet the sky does not look violet.")),
         leaf("Our eyes are simply less sensitive to violet.")),
)

tree = parse_rst_tree(doc)
print(f"parsed tree with {tree.edu_count} EDUs")

segments = segment_answer(tree, BoundaryConfig())
for i, segment in enumerate(segments):
    print(f"segment {i} (EDUs {list(segment.edu_indices)}):")
    print(f"  {segment.text}")

# Tightening the Background minimum-span size changes nothing here (no
# Background nodes), but a custom boundary table does:
narrow = BoundaryConfig(boundary_pairs=frozenset({("Elaboration", "NS")}))
print("\nwith Elaboration(NS) treated as a boundary instead:")
for i, segment in enumerate(segment_answer(tree, narrow)):
    print(f"segment {i}: {segment.text}")
