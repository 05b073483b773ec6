"""
Testes de configuração e sementes
"""
