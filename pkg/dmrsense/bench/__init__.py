"""Monte Carlo benchmarking"""
