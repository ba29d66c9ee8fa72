"""john: a distributed semi-conductor for collective free improvisation.

Generates constraint-satisfying timeline scores, lets networked clients
edit them concurrently, runs one shared synchronized playhead, and notifies
digital instruments over OSC as events begin and end.
"""

__version__ = "0.1.0"
