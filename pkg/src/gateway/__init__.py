# Gateway module
from .detector import AlertEvent, FallDetector, WindowResult, detect
from .service import GatewayService
from .windowing import StreamCounters, StreamFrame, Window, WindowPolicy, Windower, window_stream
