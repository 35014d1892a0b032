"""
Главный модуль лаборатории лог-газа
"""

import sys
from pathlib import Path

# Добавляем корневую директорию в путь для импортов
sys.path.append(str(Path(__file__).parent))

from cli import main

if __name__ == "__main__":
    sys.exit(main())
