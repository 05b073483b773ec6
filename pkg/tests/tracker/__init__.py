"""
Testes do BenchmarkTracker
"""
