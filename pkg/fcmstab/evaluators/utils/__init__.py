from .validation import *
