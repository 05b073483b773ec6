"""
Testes do sistema
"""
