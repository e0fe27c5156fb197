"""Periodicity-cost analysis of compact integrable flows.

A flow that generates an effective torus action returns every point to
itself at the action's period, so the volume integral of any metric-like
cost between a point and its time-T image vanishes exactly on the period
lattice and is positive elsewhere.  This package estimates that integral by
seeded Monte Carlo, scans it over a window of flow times, and turns the
zero structure into a toric / not-toric verdict, alongside a desk-scale
discrete transport solver for the map-versus-plan comparison the cost
functional is modeled on.
"""

from .costs import (CostEstimate, CostFunction, cost_continuity_probe,
                    estimate_cost_scale, estimate_on_samples, make_cost,
                    periodicity_cost, periodicity_cost_quadrature)
from .dynamics import (DEFAULT_INTEGRATOR, HamiltonianComponent,
                       IntegratorConfig, KernelSpec, SystemDef,
                       check_flow_commutativity, check_rank_independence,
                       check_volume_preservation, flow, flow_component,
                       hamiltonian_vector_field, poisson_bracket)
from .errors import (ChartDomainError, NewtonDivergenceError, NumericError,
                     SingularPointError, SinkhornConvergenceError,
                     ToricostError, UnknownChartError, UnknownCostError,
                     UnknownSystemError, UnsupportedMeasureError,
                     ValidationError)
from .geometry import (DarbouxChart, SingularSetSpec, chart, embed,
                       product_chart, sample_points, sphere_chart,
                       torus_chart, total_volume, validate_points)
from .kernels import active_backend, force_backend
from .systems import (CATALOG, CatalogEntry, bessel_j0_quadrature, build,
                      catalog_entry, list_catalog)
from .toricity import (INCONCLUSIVE, NOT_TORIC, TORIC_EVIDENCE,
                       ClassifyReport, ScanGrid, ScanResult, classify,
                       refine_zero, scan)
from .transport import (DiscreteMeasure, TransportMap, TransportPlan,
                        cost_matrix, measure_from_json, measure_to_json,
                        sampled_flow_coupling, solve_kantorovich_sinkhorn,
                        solve_monge_bruteforce, uniform_measure,
                        verify_monge_kantorovich_bound)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
