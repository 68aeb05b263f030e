"""Matrix-model calculus: algebras, standard form, sections, interpolators, traces."""
