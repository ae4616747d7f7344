from .general import *
from .logging import *
from .geometry_utils import *
from .channel_utils import *
from .mobility_utils import *
from .prediction_utils import *
from .routing_utils import *
from .simulation_utils import *
