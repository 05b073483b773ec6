"""
Serviços numéricos: sinais, Prony, DPM, ESPRIT, métricas e relatórios
"""
