# storage/__init__.py
"""
Файлы планировщика: сетки занятости и результаты (JSON/CSV).
"""
