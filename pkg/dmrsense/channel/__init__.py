"""Point-target echo channel"""
