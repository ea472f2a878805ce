"""
Hybrid quantum-classical collective variables for molecular dynamics
"""
