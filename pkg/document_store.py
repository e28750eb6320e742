import asyncio
import logging
from typing import List, Union

import aiofiles

from systems import SimWitness, System, parse_system, parse_witness

logger = logging.getLogger("DocumentStore")


class DocumentStore:
    """
    The librarian of the checker: it fetches system and witness documents
    from disk and hands back parsed, validated objects. Nothing here knows
    what the documents mean beyond their format.
    """

    async def read_bytes(self, path: str) -> bytes:
        async with aiofiles.open(path, "rb") as f:
            data = await f.read()
        logger.info(f"Read {len(data)} bytes from {path}")
        return data

    async def write_bytes(self, path: str, data: Union[bytes, str]):
        if isinstance(data, str):
            data = data.encode("utf-8")
        async with aiofiles.open(path, "wb") as f:
            await f.write(data)
        logger.info(f"Wrote {len(data)} bytes to {path}")

    async def load_system(self, path: str) -> System:
        return parse_system(await self.read_bytes(path))

    async def load_systems(self, *paths: str) -> List[System]:
        """Load several systems at once; the first failure propagates."""
        return list(await asyncio.gather(*(self.load_system(path) for path in paths)))

    async def load_witness(self, path: str, X: System, Y: System) -> SimWitness:
        return parse_witness(await self.read_bytes(path), X, Y)
