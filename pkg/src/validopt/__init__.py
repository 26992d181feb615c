"""validopt: optimization over trained regressors restricted to validity domains.

The toolkit samples datasets from benchmark ground truths, trains small
regressors on them, embeds the trained models into mixed-integer linear
programs, restricts the search to data-driven validity domains (coordinate
boxes, convex hulls in input space or in the extended input-output space,
ball-enlarged hulls, isolation-forest cores), solves with a built-in
LP/MILP engine, and scores the results against the known optima.
"""

__version__ = "0.1.0"
