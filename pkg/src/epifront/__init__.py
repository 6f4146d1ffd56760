"""Nonlocal-dispersal epidemic dynamics.

A numerical toolbox for a two-component epidemic system with nonlocal
diffusion and nonlocal reaction on an expanding habitat:

  - dispersal kernels with closed-form tail masses (``kernels``)
  - trapezoid collocation of the coupled nonlocal operator (``discretization``)
  - principal eigenvalues, asymptotic closed forms (``spectral``)
  - critical habitat lengths by bisection (``critical``)
  - homogeneous equilibria and spatial steady states (``model``, ``equilibrium``)
  - fixed- and free-boundary time stepping (``dynamics``)
  - spreading/vanishing classification and threshold searches (``classify``)
  - TOML-config CLI with resumable parameter sweeps (``config``, ``cli``)
"""

__version__ = "0.1.0"
