"""
wbpdecode Django Application
Importance-sampling guided training of weighted belief-propagation decoders
"""
__version__ = '0.1.0'
