"""Build and solve the desk-scale land-use planning model.

Shows the core loop: synthesize a baseline dataset, assemble the LP,
run the two-phase simplex, and validate every constraint family at the
optimum.
"""

import numpy as np

from forge import lp, model

data = model.synthesize_baseline(model.SetsSpec.desk_scale(), seed=7)
problem = model.build_lp(data)
print(f"LP size: {problem.n_vars} variables x {problem.n_rows} rows")

outcome = lp.solve(problem)
print(f"status={outcome.status}  iterations={outcome.iterations}")
print(f"objective (total discounted cost): {outcome.objective:,.3f}")

solution = model.solution_from_x(problem, data, outcome.x, outcome.objective)
report = model.validate(data, solution)
print(f"max constraint violation: {report.max_violation:.2e}")

family, index, lhs, rhs, slack, ok = report.family("peatland")[0]
print(f"peatland target in {index[0]}: abatement {lhs:,.0f} >= {rhs:,.0f} "
      f"({'satisfied' if ok else 'VIOLATED'})")

abate = model.abatement(data, solution)
print(f"total abatement  forest: {abate.total_fms:,.1f}  "
      f"agriculture: {abate.total_agri:,.1f}")
print(f"allowances purchased per year: {np.round(solution.pur_co2, 2)}")
