import logging
import sys
from colorama import Fore, init

# Initialize colorama
init(autoreset=True)

LEVEL_COLORS = {
    logging.WARNING: Fore.YELLOW,
    logging.ERROR: Fore.RED,
    logging.CRITICAL: Fore.RED,
}

class ColorFormatter(logging.Formatter):
    def format(self, record):
        """
        Formats log messages with color based on the logging level.

        Overrides the default format method of the logging.Formatter class
        so that warnings show up yellow and errors red on the console.

        Args:
            record (logging.LogRecord): The log record containing the information
                to be formatted.

        Returns:
            str: The formatted log message with appropriate colors based on the
            log level.
        """
        log_msg = super().format(record)
        color = LEVEL_COLORS.get(record.levelno)
        if color is not None:
            return f"{color}{log_msg}{Fore.RESET}"
        return log_msg

logger = logging.getLogger("zeno_logger")

if not logger.hasHandlers():  # Check if the logger already has handlers
    """
    Initializes the logger configuration if no handlers are set.

    Records go to standard error so that CSV written to standard output is
    never interleaved with diagnostics. The default level is INFO; the command
    line front-end lowers or raises it from the INI file.

    Notes:
        - The console handler is only added if the logger has no existing handlers,
        preventing duplicate messages.
    """
    logger.setLevel(logging.INFO)

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(logging.DEBUG)  # the logger level does the filtering

    formatter = ColorFormatter("%(levelname)s: %(message)s")
    console_handler.setFormatter(formatter)

    logger.addHandler(console_handler)


def set_log_level(level: str | int):
    """
    Change the level of the shared logger.

    Args:
        level (str | int): a logging level name such as 'DEBUG' or 'INFO', or its numeric value.

    Raises:
        ValueError: If the level name is unknown.
    """
    if isinstance(level, str):
        numeric_level = logging.getLevelName(level.upper())
        if not isinstance(numeric_level, int):
            raise ValueError(f"Unknown log level '{level}'")
        level = numeric_level
    logger.setLevel(level)
