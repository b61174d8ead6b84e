from logging import FileHandler, Formatter, StreamHandler, getLogger
from os.path import join
from sys import stdout


class Logger:
    def __init__(self, name, path=None, logging_level="INFO", formatter=None):
        self.file_path = None
        if formatter is None:
            formatter = Formatter(
                "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
            )
        self.formatter = formatter
        self.logger = self.setup_logger(name, logging_level)
        if path:
            self.file_path = join(path, f"{name}.log")
            self.setup_file()

    def setup_logger(self, name, logging_level):
        logger = getLogger(name)
        # re-running setup must not duplicate console output
        if not any(isinstance(h, StreamHandler) for h in logger.handlers):
            handler = StreamHandler(stdout)
            handler.setFormatter(self.formatter)
            logger.addHandler(handler)
        logger.setLevel(logging_level)
        return logger

    def setup_file(self):
        file_handler = FileHandler(self.file_path)
        file_handler.setFormatter(self.formatter)
        self.logger.addHandler(file_handler)


def setup_logger(name="fcmstab", path=None, logging_level="INFO"):
    tmp = Logger(name, path, logging_level)
    return tmp.logger


def set_logging_level(level):
    """Change the level of the package logger, e.g. from the command line"""
    global_logger.setLevel(level)


global_logger = setup_logger()
