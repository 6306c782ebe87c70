"""Command-line front end, configuration files and the field expression language."""
