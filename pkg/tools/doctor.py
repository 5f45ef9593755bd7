# tools/doctor.py
import os
import sys
import importlib
from textwrap import indent

OK = "✅"
FAIL = "❌"

def check_path():
    here = os.path.abspath(os.path.dirname(__file__))
    root = os.path.abspath(os.path.join(here, ".."))
    print(f"{OK} Proyecto en: {root}")
    return root

def check_files(root):
    expected = [
        ("tools/md2d.py", True),
        ("solver/spectral.py", True),
        ("solver/evolution.py", True),
        ("solver/continuation.py", True),
        ("checks/runner.py", True),
        ("utils/config.py", True),
        ("requirements.txt", True),
        ("configs/reference.json", True),
        ("configs/smoke.toml", False),  # opcional pero recomendado
    ]
    ok = True
    for rel, required in expected:
        p = os.path.join(root, rel)
        if os.path.exists(p):
            print(f"{OK} {rel}")
        else:
            if required:
                print(f"{FAIL} Falta: {rel}")
                ok = False
            else:
                print(f"ℹ️  (Opcional) No está {rel}")
    return ok

def check_imports():
    mods = [
        "numpy",
        "scipy.fft",
        "pandas",
        "plotly.graph_objects",
    ]
    if sys.version_info < (3, 11):
        mods.append("tomli")
    ok = True
    for m in mods:
        try:
            importlib.import_module(m)
            print(f"{OK} import {m}")
        except Exception as e:
            ok = False
            print(f"{FAIL} import {m}: {e}")
    for m in ("pytest", "hypothesis"):
        try:
            importlib.import_module(m)
            print(f"{OK} import {m}")
        except Exception:
            print(f"ℹ️  No está {m} (solo necesario para los tests).")
    return ok

def check_config(root):
    # La configuración de referencia debe pasar la validación estricta
    sys.path.insert(0, root)
    try:
        from utils.config import load_config
        load_config(os.path.join(root, "configs", "reference.json"))
        print(f"{OK} configs/reference.json válido")
        return True
    except Exception as e:
        print(f"{FAIL} configs/reference.json: {e}")
        return False

def check_threads():
    raw = os.getenv("MD2D_THREADS")
    if raw is None:
        print(f"ℹ️  MD2D_THREADS no definido (se usan {os.cpu_count() or 1} hilos).")
        return True
    try:
        ok = int(raw) >= 1
    except ValueError:
        ok = False
    print(f"{OK if ok else FAIL} MD2D_THREADS={raw}")
    return ok

def main():
    root = check_path()
    ok_files = check_files(root)
    ok_imports = check_imports()
    ok_config = check_config(root) if ok_imports else False
    ok_threads = check_threads()

    print("\nResumen:")
    print(indent(f"Archivos: {'OK' if ok_files else 'ERROR'}", "  "))
    print(indent(f"Imports: {'OK' if ok_imports else 'ERROR'}", "  "))
    print(indent(f"Configuración: {'OK' if ok_config else 'ERROR'}", "  "))
    print(indent(f"Hilos: {'OK' if ok_threads else 'ERROR'}", "  "))

    if not (ok_files and ok_imports and ok_config and ok_threads):
        sys.exit(1)

if __name__ == "__main__":
    main()
