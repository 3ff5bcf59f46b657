# Monte Carlo objective and Riemannian alternating optimizer
