# Scenario sampling, experiments and theorem analysis
