#!/usr/bin/env python3
"""
WSGI entry point for the coherence web API
"""

import os
import sys

# Add the current directory to Python path
current_dir = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, current_dir)

from app import app
from settings import setup_logging

setup_logging()

# Create application instance for WSGI server
application = app

if __name__ == "__main__":
    application.run()
