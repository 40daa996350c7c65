"""
U-Datalog with stratified negation: interpreter and precompiler.
"""
