"""Ask the advisor which two-stage plans fit two classic query shapes.

A two-stage three-outcome test can only certifiably control the error cells
that the topology of the three truth regions permits.  The advisor takes the
declared labels plus the set of regions whose error columns matter and
returns ranked plans.
"""

from tritest import AdvisorInput, advise


def show(title, inp):
    print(title)
    for rec in advise(inp):
        plan = rec.plan
        tag = "preferred" if rec.preferred else "fallback "
        cells = sorted((int(c.outcome), int(c.truth)) for c in rec.controlled_cells)
        print(f"  [{tag}] {plan.kind.value} first={int(plan.first)} "
              f"second_null={int(plan.second_null)}  controls {cells}")
        if rec.warning:
            print(f"             caveat: {rec.warning}")
    print()


# Efficacy-threshold shape: the "reaches c" region is closed, the "falls
# short" region is open, the unidentifiable band is neither.
show(
    "efficacy threshold query (control errors about region 0):",
    AdvisorInput(labels=("cno", "onc", "neither"), control_set={0}),
)

# Instrument-validity shape: the unidentifiable region is closed, the
# refutation region is open.
show(
    "instrument validity query (control errors about region 2):",
    AdvisorInput(labels=("neither", "onc", "cno"), control_set={2}),
)
