# chuk_memristor_ica/cli/__init__.py
