# Command-line interface and result writers
