"""Application builders: OPF, SVM, monotone regression, inscribed ellipsoid."""
