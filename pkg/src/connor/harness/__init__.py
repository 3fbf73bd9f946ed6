"""TCP service, keystore file and desk-scale evaluation."""
