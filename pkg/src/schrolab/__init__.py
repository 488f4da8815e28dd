""" Spectral laboratory for Schroedinger evolution on model manifolds """
