# scripts/__init__.py
"""
Вспомогательные скрипты: тестовые миры и перебор порога шума.
"""
