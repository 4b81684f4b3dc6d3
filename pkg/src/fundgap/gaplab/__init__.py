"""Experiments: gap function, collapsing domains, identities, moduli and scans."""
