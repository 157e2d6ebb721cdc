"""Spectral laboratory for global hypoellipticity of first-order operators
D_t + a(t) p + i b(t) q on the torus times a closed manifold, where the
manifold enters only through the eigenvalue sequences of p and q."""

__version__ = "0.1.0"
