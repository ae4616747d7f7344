import sys

from .general import now


# Module level switches (set once by the CLI)
_VERBOSE:bool = True        # Print INFO/MISC lines
_TIMESTAMPS:bool = True     # Prefix lines with [HH:MM:SS] (off in test mode)


def set_log_options(verbose:bool=True, timestamps:bool=True) -> None:
    """Sets the module level logging switches.

        Parameters:
            verbose (bool, optional): "False" hides INFO and MISC lines (WARN/ERROR/SUCCESS always print). Defaults to True.
            timestamps (bool, optional): "False" drops the time prefix so output is deterministic (used by --test-mode). Defaults to True.
    """
    global _VERBOSE, _TIMESTAMPS
    _VERBOSE = verbose
    _TIMESTAMPS = timestamps


def log_verbose() -> bool:
    """Returns whether INFO lines are currently printed."""
    return _VERBOSE


def log_options() -> tuple[bool, bool]:
    """Returns the current (verbose, timestamps) switches."""
    return _VERBOSE, _TIMESTAMPS


def print_log(level:str, loc:str, msg:str) -> None:
    """Prints the given message to the terminal with a timestamp and the given log level.

        Parameters:
            level (str): level to print - accepted levels are: "INFO" (grey), "WARN" (yellow), "ERROR" (red), "SUCCESS" (green), "MISC" (blue).
            loc (str): the calling function so that the log is meaningful and can be traced.
            msg (str): message to print after the timestamp and level (appears in white).

        Returns:
            None: prints the log to the terminal like: "[HH:MM:SS] {level} in {loc}: {msg}"
    """
    # Convert level to uppercase
    level = level.upper()

    # Check that a valid level is given and set the color accordingly
    match level:
        case 'INFO': color:str = '\033[90m'     # Grey
        case 'WARN': color:str = '\033[93m'     # Yellow
        case 'ERROR': color:str = '\033[91m'    # Red
        case 'MISC': color:str = '\033[94m'     # Blue
        case 'SUCCESS': color:str = '\033[92m'  # Green
        case _: color:str = '\033[94m'          # Default: Blue

    # Quiet mode drops the chatter
    if not _VERBOSE and level in ('INFO', 'MISC'): return

    # Errors and warnings go to stderr so stdout stays clean for echoed results
    stream = sys.stderr if level in ('WARN', 'ERROR') else sys.stdout

    # Print the log
    prefix:str = f'[{now()}] ' if _TIMESTAMPS else ''
    print(f'\033[0m{prefix}{color}{level} in {loc}: \033[0m{msg}', file=stream)
