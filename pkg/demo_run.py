#!/usr/bin/env python3
"""
Demo-Lauf von residue-lab
Führt die Sammel-Suite paper-core lokal aus (ohne bashio)
"""

import os
import sys
import logging

# Add residue-lab app directory to Python path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), 'residue-lab', 'app'))

# Set demo environment variables
os.environ.setdefault('RES_LAB_THREADS', str(min(4, os.cpu_count() or 1)))
os.environ.setdefault('RES_LAB_PRECISION_BITS', '256')
os.environ.setdefault('LOG_LEVEL', 'info')

# Import and start the main application
try:
    from main import main

    print("residue-lab Demo")
    print("=" * 50)
    print("Verifiziere Suite paper-core...")
    print("=" * 50)

    sys.exit(main(['verify', 'paper-core', '--report', 'paper-core-report.json']))

except KeyboardInterrupt:
    print("\nDemo beendet durch Benutzer")
except Exception as e:
    print(f"Fehler beim Starten: {e}")
    logging.exception("Detailed error:")
    sys.exit(1)
