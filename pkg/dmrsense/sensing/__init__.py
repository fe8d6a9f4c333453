"""Range/velocity estimation and bounds"""
