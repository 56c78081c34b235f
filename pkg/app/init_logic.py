# инициализация клиентов
from clients.bundle_file import BundleFile
from clients.report_writer import ReportWriter

# инициализация репозиториев
from app.storage.bundle import BundleRepository

# инициализация сервисов
from app.services.workbench import WorkbenchService

# инициализация клиентов
bundle_file = BundleFile()
report_writer = ReportWriter(files=bundle_file)
# ____________________________________________

# инициализация репозиториев
bundle_repo = BundleRepository(files=bundle_file)
# ____________________________________________

# инициализация сервисов
workbench_service = WorkbenchService(repository=bundle_repo)
# ____________________________________________
