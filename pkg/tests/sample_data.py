"""A small hand-checked store used across the warehouse, cube, journey and CLI tests.

Two zones side by side with an unzoned strip above them:

    y 5..10   UNZONED
    y 0..5    Produce (x 0..10) | Dairy (x 10..20)

C1 on 2024-03-04 stops 20 s in Produce, walks 20 m through the strip in 8 s and
stops 20 s in Dairy, then buys apples and milk. C2 on 2024-03-05 stops 15 s in
Produce, leaves one orphan ping after a 60 s gap and buys pears. C3 only stands
10 s in the strip. A walk-in buys three milks on 2024-04-02.
"""

import hashlib
import os
from datetime import datetime, timedelta, timezone

from helpers.workspace_ops import write_atomic
from models.config_model import AppConfig
from pipeline import reference, simgen
from pipeline.etl import run_load
from pipeline.ingest import parse_pings, parse_pos
from pipeline.staging import StagingStore
from pipeline.storemap import load_map

ZONES = """# bounds=0,0,20,10
area_name,x0,y0,x1,y1,sequence_index
Produce,0,0,10,5,1
Dairy,10,0,20,5,2
"""

PRODUCTS = """sku_key,product_name,category,supplier_name,home_area_name,unit_price,stock_on_hand
SKU-A,Apples,Fruit,Farm Co,Produce,1.50,100
SKU-B,Milk,Milk,Dairy Co,Dairy,2.00,50
SKU-C,Pears,Fruit,Farm Co,Produce,3.00,0
"""

COSTS = """sku_key,unit_cost
SKU-A,1.00
SKU-B,1.20
SKU-C,2.00
"""

DEMOGRAPHICS = """customer_id,gender,age,location
C1,F,30,North
C2,M,70,South
C3,,UNKNOWN,
"""

POS = """customer_id,ts,receipt_id,sku_key,product_name,quantity,unit_price,line_total
C1,2024-03-04T10:05:00+00:00,R1,SKU-A,Apples,2,1.50,3.00
C1,2024-03-04T10:05:00+00:00,R1,SKU-B,Milk,1,2.00,2.00
C2,2024-03-05T11:00:00+00:00,R2,SKU-C,Pears,1,3.00,3.00
,2024-04-02T12:00:00+00:00,W1,SKU-B,Milk,3,2.00,6.00
"""

PING_HEADER = "customer_id,ts,x,y,status\n"


def ping_line(customer_id: str, ts: datetime, x: float, y: float, status: str = '') -> str:
    return f"{customer_id},{ts.isoformat()},{x!r},{y!r},{status}\n"


def c1_track():
    """(seconds, x, y) of C1's walk: 21 fixes in Produce, 7 through the strip, 21 in Dairy."""
    track = [(t, 5.0, 2.5) for t in range(0, 21)]
    walk = [(5.0, 5.0), (5.0, 7.5), (7.5, 7.5), (10.0, 7.5), (12.5, 7.5), (15.0, 7.5), (15.0, 5.0)]
    track += [(21 + k, x, y) for k, (x, y) in enumerate(walk)]
    track += [(t, 15.0, 2.5) for t in range(28, 49)]
    return track


def pings_text() -> str:
    c1_start = datetime(2024, 3, 4, 10, 0, 0, tzinfo=timezone.utc)
    c2_start = datetime(2024, 3, 5, 11, 0, 0, tzinfo=timezone.utc)
    c3_start = datetime(2024, 3, 5, 12, 0, 0, tzinfo=timezone.utc)
    lines = [PING_HEADER]
    lines += [ping_line('C1', c1_start + timedelta(seconds=t), x, y) for t, x, y in c1_track()]
    lines += [ping_line('C2', c2_start + timedelta(seconds=t), 5.0, 2.5) for t in range(0, 16)]
    lines.append(ping_line('C2', c2_start + timedelta(seconds=75), 15.0, 2.5))
    lines += [ping_line('C3', c3_start + timedelta(seconds=t), 5.0, 7.5) for t in range(0, 11)]
    return ''.join(lines)


def store_map():
    return load_map(ZONES)


def stage_sample(workspace: str) -> StagingStore:
    """Ingest the sample ping and POS files into a workspace's staging area."""
    staging = StagingStore(workspace)
    pings = pings_text().encode('utf-8')
    staging.stage(parse_pings(pings, store_map()), 'pings.csv', 'pings-checksum')
    staging.stage(parse_pos(POS.encode('utf-8')), 'pos.csv', 'pos-checksum')
    return staging


def load_sample(workspace: str, config: AppConfig = None):
    """Stage and load the sample; returns the LoadSummary."""
    stage_sample(workspace)
    return run_load(
        workspace,
        store_map(),
        reference.parse_catalogue(PRODUCTS.encode('utf-8')),
        reference.parse_costs(COSTS.encode('utf-8')),
        reference.parse_demographics(DEMOGRAPHICS.encode('utf-8')),
        config or AppConfig(),
    )


def write_inputs(directory: str) -> dict:
    """Write every sample file into a directory for CLI tests; returns name -> path."""
    files = {
        'zones.csv': ZONES,
        'products.csv': PRODUCTS,
        'costs.csv': COSTS,
        'demographics.csv': DEMOGRAPHICS,
        'pings.csv': pings_text(),
        'pos.csv': POS,
    }
    paths = {}
    for name, text in files.items():
        path = os.path.join(directory, name)
        write_atomic(path, text)
        paths[name] = path
    return paths


def load_simulation(output, workspace: str, config: AppConfig = None):
    """Stage a generated store's pings and POS lines and load them with its reference files."""
    store_map = load_map(output.files[simgen.ZONES_FILE])
    staging = StagingStore(workspace)
    staging.stage(parse_pings(output.data(simgen.PINGS_FILE), store_map), simgen.PINGS_FILE,
                  hashlib.sha256(output.data(simgen.PINGS_FILE)).hexdigest())
    staging.stage(parse_pos(output.data(simgen.POS_FILE)), simgen.POS_FILE,
                  hashlib.sha256(output.data(simgen.POS_FILE)).hexdigest())
    return run_load(
        workspace,
        store_map,
        reference.parse_catalogue(output.data(simgen.PRODUCTS_FILE)),
        reference.parse_costs(output.data(simgen.COSTS_FILE)),
        reference.parse_demographics(output.data(simgen.DEMOGRAPHICS_FILE)),
        config or AppConfig(),
    )
