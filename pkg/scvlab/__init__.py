"""Numerical certificates for several complex variables"""
