from .base import StrictModel
from .geometry import *
from .mobility import *
from .channel import *
from .prediction import *
from .routing import *
from .simulation import *
