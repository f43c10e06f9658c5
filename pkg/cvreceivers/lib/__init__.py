"""
cvreceivers library modules.
"""
