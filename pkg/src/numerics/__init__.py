"""Modules de calcul : grilles, opérateurs, schémas, stabilité, estimateurs."""
