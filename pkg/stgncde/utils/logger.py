import logging
import sys
from pathlib import Path
from datetime import datetime
from typing import Optional

from ..config import settings

class AppLogger:
    """Application logger with console and optional daily file output"""
    
    def __init__(self, name: str = "stgncde", log_level: str = "INFO", log_dir: Optional[str] = "logs"):
        self.logger = logging.getLogger(name)
        self.logger.setLevel(getattr(logging, log_level.upper(), logging.INFO))
        self.logger.propagate = False
        
        # Avoid duplicate handlers
        if self.logger.handlers:
            return
        
        formatter = logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
        )
        
        console_handler = logging.StreamHandler(sys.stdout)
        console_handler.setLevel(logging.INFO)
        console_handler.setFormatter(formatter)
        self.logger.addHandler(console_handler)
        
        # An empty log dir disables the file handler
        if log_dir:
            log_path = Path(log_dir)
            log_path.mkdir(parents=True, exist_ok=True)
            log_file = log_path / f"{name}_{datetime.now().strftime('%Y%m%d')}.log"
            file_handler = logging.FileHandler(log_file)
            file_handler.setLevel(logging.DEBUG)
            file_handler.setFormatter(formatter)
            self.logger.addHandler(file_handler)
    
    def get_logger(self):
        """Return the configured logger"""
        return self.logger

# Create singleton instance
app_logger = AppLogger(settings.APP_NAME, settings.LOG_LEVEL, settings.LOG_DIR)
logger = app_logger.get_logger()
