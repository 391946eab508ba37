# chuk_memristor_ica/core/__init__.py
