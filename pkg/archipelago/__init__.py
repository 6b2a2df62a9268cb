"""
Archipelago Calculus
Word calculus for free products, the topologist's product and archipelago groups.
"""
__version__ = "1.0.0"
