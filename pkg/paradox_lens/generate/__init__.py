from .two_k import *
from .rewire import *
from .core_periphery import *
