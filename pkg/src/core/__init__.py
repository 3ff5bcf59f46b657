# Core configuration, models, errors and caching
