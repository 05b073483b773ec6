"""
BenchmarkTracker - Execução dos experimentos de Monte Carlo
"""
