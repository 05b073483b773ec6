"""
Utilitários: configuração, exceções e sementes
"""
