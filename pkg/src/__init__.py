"""
rankcheck: rank-similarity metrics and explainer comparison toolkit
"""
