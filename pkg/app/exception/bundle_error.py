class BundleError(Exception):
    """Исключение, возникающее когда бандл нельзя прочитать или он не задает категорию"""

    def __init__(self, path: str, location: str, reason: str):
        """
        :param path: Путь к файлу бандла (или имя встроенной фикстуры)
        :param location: Позиция в документе, например 'morphisms[3].src'
        :param reason: Описание ошибки
        """
        self.path = path
        self.location = location
        self.reason = reason
        self.message = f"{path}: {location}: {reason}" if location else f"{path}: {reason}"
        super().__init__(self.message)

    def __str__(self):
        return self.message


class UnknownFixture(Exception):
    """Исключение, возникающее когда источник не файл и не имя встроенной фикстуры"""

    def __init__(self, name: str):
        self.name = name
        self.message = f"Неизвестная фикстура или файл бандла '{name}'"
        super().__init__(self.message)

    def __str__(self):
        return self.message


class UnknownPresheaf(Exception):
    """Исключение, возникающее когда предпучка с таким именем нет ни в бандле, ни среди встроенных"""

    def __init__(self, name: str, available: list[str] = None):
        """
        :param name: Запрошенное имя
        :param available: Имена, которые можно использовать (необязательно)
        """
        self.name = name
        self.available = available or []
        self.message = f"Предпучок '{name}' не найден"
        if self.available:
            self.message += f". Доступны: {', '.join(self.available)}"
        super().__init__(self.message)

    def __str__(self):
        return self.message
