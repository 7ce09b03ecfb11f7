# Package src per il solutore ES-BGK semi-Lagrangiano
