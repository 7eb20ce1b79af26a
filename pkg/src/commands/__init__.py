"""Commandes de la ligne de commande, enregistrées sur le groupe principal."""
