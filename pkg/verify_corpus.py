import asyncio
import os
import sys

from document_store import DocumentStore
from errors import TraceCheckError
from systems import check_document, decode_system, serialize_system

CORPUS = os.path.join(os.path.dirname(os.path.abspath(__file__)), "corpus")


async def verify(directory: str = CORPUS) -> bool:
    print("--- Verifying Corpus ---")
    store = DocumentStore()
    ok = True

    names = sorted(name for name in os.listdir(directory) if name.endswith(".sys"))
    print(f"Found {len(names)} system documents in {directory}")

    for name in names:
        path = os.path.join(directory, name)
        try:
            data = await store.read_bytes(path)
            diagnostics = check_document(data)
            if diagnostics:
                ok = False
                print(f"❌ {name}: {len(diagnostics)} problems")
                for d in diagnostics:
                    print(f"   {d.code} at {d.state}: {d.detail}")
                continue

            system = decode_system(data)
            if serialize_system(system) != data:
                ok = False
                print(f"❌ {name}: not in canonical layout")
                continue
            print(f"✅ {name}: {system.monad.value}, {len(system.states)} states")
        except (TraceCheckError, OSError) as e:
            ok = False
            print(f"❌ {name}: {type(e).__name__}: {e}")

    return ok


if __name__ == "__main__":
    sys.exit(0 if asyncio.run(verify(*sys.argv[1:2])) else 1)
