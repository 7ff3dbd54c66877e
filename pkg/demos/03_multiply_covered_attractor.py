"""Long-time limit: a round circle of radius L0 / (2 pi omega).

Whatever small perturbation we start from, the flow keeps the length L0 and
the winding number omega fixed and sends the curvature to the constant
2*pi*omega/L0.  Reconstructing the final curve and fitting a circle to it
recovers the predicted radius: 1 for the unit circle, 0.5 for the doubly
covered one, 2 when the same winding carries twice the length.
"""

import numpy as np

from curveflow import IntegratorConfig, make_perturbed_circle, reconstruct, run

for omega, L0 in ((1, 2 * np.pi), (2, 2 * np.pi), (1, 4 * np.pi)):
    profile = make_perturbed_circle(L0, omega, 256, [(3, 1e-3, 0.0)])
    record = run(
        profile,
        IntegratorConfig(dt=1e-4, t_max=5.0, energy_tol=1e-16),
        output_stride=10,
    )
    curve = reconstruct(record.final_state.profile)
    target = L0 / (2 * np.pi * omega)
    print(
        f"omega={omega} L0={L0:7.4f}: status={record.status:9s} "
        f"steps={record.steps_taken:5d} radius={curve.best_fit_radius:.9f} "
        f"(target {target:.3f}, error {abs(curve.best_fit_radius - target):.2e}) "
        f"closure={curve.closure_defect:.2e}"
    )

print("\nThe attractor keeps no memory of the perturbation, only (L0, omega).")
